//! Quadrature and interpolation primitives.
//!
//! Provides the three numerical building blocks the scattering engine rests
//! on:
//!
//! * [`GaussLegendre`] — classical Gauss-Legendre rules on `[-1, 1]`,
//!   computed by Newton iteration on the Legendre recurrence,
//! * [`adaptive_gk15`] — globally adaptive Gauss-Kronrod (7, 15) integration
//!   for complex-valued integrands on finite intervals,
//! * [`Barycentric`] — barycentric Lagrange interpolation on arbitrary node
//!   sets, with the explicit stable weight formula for Gauss-Legendre nodes.

use num_complex::Complex64;

/// Gauss-Legendre quadrature rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre polynomial P_n and its derivative at `x` via the three-term
/// recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    for j in 1..n {
        let jf = j as f64;
        let p_next = ((2.0 * jf + 1.0) * x * p - jf * p_prev) / (jf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

impl GaussLegendre {
    /// Build the `n`-point rule. Nodes come out in ascending order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess for the i-th largest root.
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 * (1.0 + x.abs()) {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // i-th largest root sits at the top end of the ascending array.
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate a complex-valued function over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, f: F) -> Complex64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(c + h * x) * *w;
        }
        acc * h
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae,
// descending; the last entry is the centre node).
const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One (7, 15) Gauss-Kronrod panel. Returns the Kronrod value and the
/// |Kronrod - Gauss| error estimate.
fn gk15_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK15[7];
    let mut gauss = fc * WG7[3];
    for (j, x) in XGK15.iter().enumerate().take(7) {
        let dx = h * x;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        kron += s * WGK15[j];
        if j % 2 == 1 {
            gauss += s * WG7[(j - 1) / 2];
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).norm();
    (value, err)
}

/// Result of an adaptive quadrature run.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    /// Accumulated error estimate (absolute).
    pub error: f64,
    pub evals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

/// Globally adaptive Gauss-Kronrod integration of a complex integrand over
/// `[a, b]` to absolute tolerance `tol_abs`. Splits the current worst segment
/// until the summed error estimate drops below tolerance or the evaluation
/// budget runs out. Fully deterministic: ties in the worst-segment choice are
/// broken by the left endpoint.
pub fn adaptive_gk15<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol_abs: f64,
    max_evals: usize,
) -> QuadResult {
    let (v, e) = gk15_panel(f, a, b);
    let mut segs = vec![Segment { a, b, value: v, error: e }];
    let mut evals = 15usize;
    loop {
        let total_err: f64 = segs.iter().map(|s| s.error).sum();
        if total_err <= tol_abs || evals + 30 > max_evals {
            let value = segs.iter().map(|s| s.value).sum();
            return QuadResult { value, error: total_err, evals };
        }
        // Worst segment, ties broken by left endpoint.
        let mut worst = 0;
        for (i, s) in segs.iter().enumerate().skip(1) {
            let w = &segs[worst];
            if s.error > w.error || (s.error == w.error && s.a < w.a) {
                worst = i;
            }
        }
        let Segment { a: sa, b: sb, .. } = segs.swap_remove(worst);
        let m = 0.5 * (sa + sb);
        if !(sa < m && m < sb) {
            // Interval too narrow to split further; accept as-is.
            let (v, _) = gk15_panel(f, sa, sb);
            segs.push(Segment { a: sa, b: sb, value: v, error: 0.0 });
            evals += 15;
            continue;
        }
        let (v1, e1) = gk15_panel(f, sa, m);
        let (v2, e2) = gk15_panel(f, m, sb);
        evals += 30;
        segs.push(Segment { a: sa, b: m, value: v1, error: e1 });
        segs.push(Segment { a: m, b: sb, value: v2, error: e2 });
    }
}

/// Adaptive integration over a pre-segmented interval list. Segment
/// boundaries are kept; the budget is shared globally.
pub fn adaptive_gk15_segmented<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    tol_abs: f64,
    max_evals: usize,
) -> QuadResult {
    assert!(breakpoints.len() >= 2);
    let n_seg = breakpoints.len() - 1;
    let per_seg_tol = tol_abs / n_seg as f64;
    let per_seg_budget = max_evals / n_seg;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evals = 0;
    for w in breakpoints.windows(2) {
        let r = adaptive_gk15(f, w[0], w[1], per_seg_tol, per_seg_budget.max(45));
        value += r.value;
        error += r.error;
        evals += r.evals;
    }
    QuadResult { value, error, evals }
}

/// Barycentric Lagrange interpolation on a fixed node set.
#[derive(Debug, Clone, PartialEq)]
pub struct Barycentric {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Barycentric {
    /// Weights from the product formula, accumulated in log scale so that
    /// large node counts neither overflow nor underflow. Weights are defined
    /// up to a common factor, which is normalized away.
    pub fn from_nodes(nodes: &[f64]) -> Self {
        let n = nodes.len();
        assert!(n >= 2, "interpolation needs at least two nodes");
        let mut logs = vec![0.0f64; n];
        let mut signs = vec![1.0f64; n];
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    continue;
                }
                let d = nodes[j] - nodes[i];
                assert!(d != 0.0, "interpolation nodes must be distinct");
                logs[j] += d.abs().ln();
                if d < 0.0 {
                    signs[j] = -signs[j];
                }
            }
        }
        let m = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights = (0..n).map(|j| signs[j] * (-(logs[j] - m)).exp()).collect();
        Self { nodes: nodes.to_vec(), weights }
    }

    /// Explicit stable weights for Gauss-Legendre nodes,
    /// `w_j ∝ (-1)^j sqrt((1 - x_j^2) u_j)` with `u_j` the quadrature weights.
    pub fn for_gauss_legendre(rule: &GaussLegendre) -> Self {
        let nodes = rule.nodes().to_vec();
        let weights = nodes
            .iter()
            .zip(rule.weights())
            .enumerate()
            .map(|(j, (x, u))| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - x * x) * u).sqrt()
            })
            .collect();
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Evaluate the interpolant of `values` (samples at the node set) at `x`.
    /// Exact at the nodes themselves.
    pub fn eval(&self, values: &[Complex64], x: f64) -> Complex64 {
        assert_eq!(values.len(), self.nodes.len());
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((xj, wj), vj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return *vj;
            }
            let t = wj / d;
            num += vj * t;
            den += t;
        }
        num / den
    }
}
