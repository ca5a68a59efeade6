//! Transfer-matrix assembly: the x-ordered Dyson series and the direct
//! first-order construction.
//!
//! The transfer matrix is the x-ordered exponential of the effective
//! Hamiltonian,
//!
//! ```text
//! M = I - i int H dx + (-i)^2 iint_{x1<x2} H(x2) H(x1) dx2 dx1 + ...
//! ```
//!
//! evaluated by composite midpoint slicing. The iterated integrals use the
//! algebraic identity
//!
//! ```text
//! sum_l E_l(x2) D_l(x1) = diag( i sin(varpi (x2-x1)) / varpi )
//! ```
//!
//! so a product of H-blocks collapses to `D_i A(x2) Phi(x2,x1) A(x1) E_j`,
//! and the sine addition formula splits `Phi` into prefix sums over earlier
//! slices: one `N x N` product per slice and block-column instead of a full
//! `2N x 2N` product per slice pair. Contributions accumulate in ascending
//! x, which is what the ordering demands; equal-slice contributions vanish
//! identically because `Phi(x, x) = 0`.
//!
//! [`first_order_m`] assembles `M = I - i int H dx` without any
//! x-integration, directly from the 2D transform:
//!
//! ```text
//! (M_ij - delta_ij)_{mn} = [-i eps_i / (4 pi varpi_m)]
//!                          V2(eps_i varpi_m - eps_j varpi_n, p_m - p_n) w_n
//! ```
//!
//! The in-band momentum-transfer integral over `q in [alpha, k + p]` is
//! realized through the kernel itself: the transform vanishes for
//! `q <= alpha`, and rows with `k + p_m <= alpha` come out identically zero.
//! It is gated on the support certificate and `k <= alpha`.

use num_complex::Complex64;

use crate::potentials::{certify_support, Potential};

use super::grid::MomentumGrid;
use super::linalg::CMat;
use super::operators::{d_diag, e_diag, eps_sign, v_op};
use super::OracleError;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// How a transfer matrix was assembled; retained so the delta-source kernel
/// columns can be recomputed for any incidence afterwards.
#[derive(Debug, Clone)]
pub(super) enum Assembly {
    Dyson { v: Potential },
    FirstOrder { v: Potential },
}

/// Discretized 2x2-block transfer matrix at a given Dyson order.
#[derive(Debug, Clone)]
pub struct TransferMatrixNum {
    blocks: [[CMat; 2]; 2],
    pub dyson_order: u32,
    /// Slicing record: x-domain and slice count (zero for the direct
    /// first-order construction).
    pub domain: (f64, f64),
    pub n_x: usize,
    /// Spectral norms of the accumulated Dyson terms, index 0 = order 1.
    pub term_norms: Vec<f64>,
    grid: MomentumGrid,
    pub(super) assembly: Assembly,
}

impl TransferMatrixNum {
    /// Block `M_ij`, `i, j in {1, 2}`.
    pub fn block(&self, i: u8, j: u8) -> &CMat {
        &self.blocks[(i - 1) as usize][(j - 1) as usize]
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    /// `M_ij - delta_ij I`.
    pub fn minus_identity_block(&self, i: u8, j: u8) -> CMat {
        let mut b = self.block(i, j).clone();
        if i == j {
            let id = CMat::identity(b.rows());
            b.add_assign_scaled(&id, Complex64::new(-1.0, 0.0));
        }
        b
    }

    /// Stacked `2N x 2N` matrix of `M - I`.
    pub fn stacked_minus_identity(&self) -> CMat {
        let b11 = self.minus_identity_block(1, 1);
        let b12 = self.minus_identity_block(1, 2);
        let b21 = self.minus_identity_block(2, 1);
        let b22 = self.minus_identity_block(2, 2);
        CMat::from_blocks([[&b11, &b12], [&b21, &b22]])
    }

    /// Relative size of the order-2 Dyson correction, `|T2| / |T1|`.
    /// Requires assembly at order >= 2.
    pub fn order2_rel_norm(&self) -> Option<f64> {
        if self.term_norms.len() < 2 {
            return None;
        }
        let t1 = self.term_norms[0];
        if t1 == 0.0 {
            return Some(0.0);
        }
        Some(self.term_norms[1] / t1)
    }
}

/// Outcome of the 16 block-product checks on `M - I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm2Check {
    /// `max_{ij,i'j'} |(M_ij - d_ij)(M_i'j' - d_i'j')|`.
    pub max_product_norm: f64,
    /// `|M - I|` (stacked spectral norm), for relative comparisons.
    pub m_minus_i_norm: f64,
}

/// All 16 products of `(M_ij - delta_ij)` blocks; in the exactness band they
/// must vanish.
pub fn thm2_products(m: &TransferMatrixNum) -> Thm2Check {
    let blocks: Vec<CMat> = [(1u8, 1u8), (1, 2), (2, 1), (2, 2)]
        .iter()
        .map(|&(i, j)| m.minus_identity_block(i, j))
        .collect();
    let mut max_product_norm = 0.0f64;
    for a in &blocks {
        for b in &blocks {
            max_product_norm = max_product_norm.max(a.matmul(b).spectral_norm());
        }
    }
    Thm2Check { max_product_norm, m_minus_i_norm: m.stacked_minus_identity().spectral_norm() }
}

/// Default symmetric slicing domain for a potential at `n_x` midpoint
/// slices: the half-width where `|v|` falls below `1e-10` of its peak,
/// capped at the width the slicing can still resolve without aliasing the
/// fastest phase `2k + max|beta_x|` (widening past that cap only adds
/// error).
pub fn default_domain(
    v: &Potential,
    k: f64,
    n_x: usize,
) -> Result<(f64, f64), OracleError> {
    let decay = v.x_decay_halfwidth(1e-10).ok_or_else(|| {
        OracleError::InvalidParameter(
            "potential has a constant x-factor; its x-support cannot be truncated".into(),
        )
    })?;
    let omega_max = 2.0 * k + v.max_x_phase();
    let alias_margin = 25.0 / v.min_x_scale();
    let alias_cap = std::f64::consts::PI * n_x as f64 / (omega_max + alias_margin);
    let mut half = decay.min(alias_cap);
    if !half.is_finite() || half <= 0.0 {
        half = 1.0;
    }
    Ok((-half, half))
}

/// Dyson-series transfer matrix truncated at `order in {1, 2, 3}` on the
/// given slicing. Cost grows linearly in `n_x` with one (order 2) or two
/// (order 3) `N^3` products per slice and block-column.
pub fn dyson(
    v: &Potential,
    grid: &MomentumGrid,
    domain: (f64, f64),
    n_x: usize,
    order: u32,
) -> Result<TransferMatrixNum, OracleError> {
    if !(1..=3).contains(&order) {
        return Err(OracleError::UnsupportedOrder(order));
    }
    if n_x < 2 {
        return Err(OracleError::InvalidParameter(format!(
            "need at least 2 slices, got {n_x}"
        )));
    }
    let (lo, hi) = domain;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(OracleError::InvalidParameter(format!(
            "invalid x-domain [{lo}, {hi}]"
        )));
    }
    let n = grid.len();
    let dx = (hi - lo) / n_x as f64;
    let i_unit = Complex64::new(0.0, 1.0);

    let mut t1 = [[CMat::zeros(n, n), CMat::zeros(n, n)], [CMat::zeros(n, n), CMat::zeros(n, n)]];
    let mut t2 = t1.clone();
    let mut t3 = t1.clone();
    // Prefix sums over earlier slices, per right-dressing column j.
    let mut pc = [CMat::zeros(n, n), CMat::zeros(n, n)];
    let mut ps = [CMat::zeros(n, n), CMat::zeros(n, n)];
    let mut qc = [CMat::zeros(n, n), CMat::zeros(n, n)];
    let mut qs = [CMat::zeros(n, n), CMat::zeros(n, n)];

    for s in 0..n_x {
        let x = lo + (s as f64 + 0.5) * dx;
        let a = v_op(v, x, grid)?;
        let d = [d_diag(grid, 1, x), d_diag(grid, 2, x)];
        let cosv: Vec<Complex64> =
            grid.varpi().iter().map(|&w| Complex64::new((w * x).cos(), 0.0)).collect();
        let sinv: Vec<Complex64> =
            grid.varpi().iter().map(|&w| Complex64::new((w * x).sin(), 0.0)).collect();
        // i sin(wx)/w and -i cos(wx)/w, the split of Phi(x, x1).
        let isv: Vec<Complex64> =
            grid.varpi().iter().map(|&w| i_unit * ((w * x).sin() / w)).collect();
        let micv: Vec<Complex64> =
            grid.varpi().iter().map(|&w| -i_unit * ((w * x).cos() / w)).collect();

        for j in [1u8, 2u8] {
            let ji = (j - 1) as usize;
            let aej = a.cols_scaled(&e_diag(grid, j, x));

            if order >= 2 {
                let mut inner = pc[ji].rows_scaled(&isv);
                inner.add_assign_scaled(&ps[ji].rows_scaled(&micv), Complex64::new(1.0, 0.0));
                let g = a.matmul(&inner);

                if order >= 3 {
                    let mut inner2 = qc[ji].rows_scaled(&isv);
                    inner2
                        .add_assign_scaled(&qs[ji].rows_scaled(&micv), Complex64::new(1.0, 0.0));
                    let g2 = a.matmul(&inner2);
                    for i in [1u8, 2u8] {
                        let ii = (i - 1) as usize;
                        // (-i)^3 = +i
                        t3[ii][ji].add_assign_scaled(
                            &g2.rows_scaled(&d[ii]),
                            Complex64::new(0.0, dx),
                        );
                    }
                    qc[ji].add_assign_scaled(&g.rows_scaled(&cosv), Complex64::new(dx, 0.0));
                    qs[ji].add_assign_scaled(&g.rows_scaled(&sinv), Complex64::new(dx, 0.0));
                }

                for i in [1u8, 2u8] {
                    let ii = (i - 1) as usize;
                    // (-i)^2 = -1
                    t2[ii][ji]
                        .add_assign_scaled(&g.rows_scaled(&d[ii]), Complex64::new(-dx, 0.0));
                }
            }

            for i in [1u8, 2u8] {
                let ii = (i - 1) as usize;
                t1[ii][ji]
                    .add_assign_scaled(&aej.rows_scaled(&d[ii]), Complex64::new(0.0, -dx));
            }

            if order >= 2 {
                pc[ji].add_assign_scaled(&aej.rows_scaled(&cosv), Complex64::new(dx, 0.0));
                ps[ji].add_assign_scaled(&aej.rows_scaled(&sinv), Complex64::new(dx, 0.0));
            }
        }
    }

    let stack = |t: &[[CMat; 2]; 2]| {
        CMat::from_blocks([[&t[0][0], &t[0][1]], [&t[1][0], &t[1][1]]]).spectral_norm()
    };
    let mut term_norms = vec![stack(&t1)];
    if order >= 2 {
        term_norms.push(stack(&t2));
    }
    if order >= 3 {
        term_norms.push(stack(&t3));
    }

    let id = CMat::identity(n);
    let mut blocks = t1;
    for i in 0..2 {
        blocks[i][i].add_assign_scaled(&id, Complex64::new(1.0, 0.0));
        for j in 0..2 {
            if order >= 2 {
                blocks[i][j].add_assign_scaled(&t2[i][j], Complex64::new(1.0, 0.0));
            }
            if order >= 3 {
                blocks[i][j].add_assign_scaled(&t3[i][j], Complex64::new(1.0, 0.0));
            }
        }
    }

    Ok(TransferMatrixNum {
        blocks,
        dyson_order: order,
        domain,
        n_x,
        term_norms,
        grid: grid.clone(),
        assembly: Assembly::Dyson { v: v.clone() },
    })
}

/// First-order kernel prefactor `-i eps_i / (4 pi varpi)`.
fn kernel_prefactor(i: u8, varpi: f64) -> Complex64 {
    Complex64::new(0.0, -eps_sign(i) / (FOUR_PI * varpi))
}

/// Direct first-order transfer matrix from the 2D transform, valid only in
/// the exactness regime: the support certificate must hold and `k <= alpha`.
pub fn first_order_m(
    v: &Potential,
    grid: &MomentumGrid,
    alpha: f64,
) -> Result<TransferMatrixNum, OracleError> {
    let cert = certify_support(v, alpha, 16);
    if !cert.cond_y_halfline {
        return Err(OracleError::ExactnessPreconditionsUnmet(
            "the y-transform support condition does not hold".into(),
        ));
    }
    if grid.k() > alpha {
        return Err(OracleError::ExactnessPreconditionsUnmet(format!(
            "k = {} exceeds the critical wavenumber alpha = {alpha}",
            grid.k()
        )));
    }
    let n = grid.len();
    let mut blocks =
        [[CMat::zeros(n, n), CMat::zeros(n, n)], [CMat::zeros(n, n), CMat::zeros(n, n)]];
    for i in [1u8, 2u8] {
        let ei = eps_sign(i);
        for j in [1u8, 2u8] {
            let ej = eps_sign(j);
            let mut b = CMat::zeros(n, n);
            for m in 0..n {
                let pre = kernel_prefactor(i, grid.varpi()[m]);
                for nn in 0..n {
                    let kx = ei * grid.varpi()[m] - ej * grid.varpi()[nn];
                    let ky = grid.p()[m] - grid.p()[nn];
                    let val = v.ft2d(kx, ky)?;
                    b.set(m, nn, pre * val * grid.weights()[nn]);
                }
            }
            blocks[(i - 1) as usize][(j - 1) as usize] = b;
        }
    }
    let norm = CMat::from_blocks([
        [&blocks[0][0], &blocks[0][1]],
        [&blocks[1][0], &blocks[1][1]],
    ])
    .spectral_norm();
    let id = CMat::identity(n);
    blocks[0][0].add_assign_scaled(&id, Complex64::new(1.0, 0.0));
    blocks[1][1].add_assign_scaled(&id, Complex64::new(1.0, 0.0));

    Ok(TransferMatrixNum {
        blocks,
        dyson_order: 1,
        domain: (0.0, 0.0),
        n_x: 0,
        term_norms: vec![norm],
        grid: grid.clone(),
        assembly: Assembly::FirstOrder { v: v.clone() },
    })
}

/// Delta-source kernel columns `(M_ij - delta_ij) delta_{p0}` evaluated by
/// direct kernel evaluation at `p0` (no grid interpolation). For a
/// Dyson-assembled matrix this reruns the slice recursion on column vectors.
pub(crate) fn kernel_columns(
    m: &TransferMatrixNum,
    p0: f64,
) -> Result<[[Vec<Complex64>; 2]; 2], OracleError> {
    let grid = &m.grid;
    let k = grid.k();
    let varpi0 = (k * k - p0 * p0).sqrt();
    match &m.assembly {
        Assembly::FirstOrder { v } => {
            let n = grid.len();
            let mut out: [[Vec<Complex64>; 2]; 2] = Default::default();
            for i in [1u8, 2u8] {
                let ei = eps_sign(i);
                for j in [1u8, 2u8] {
                    let ej = eps_sign(j);
                    let mut col = Vec::with_capacity(n);
                    for mm in 0..n {
                        let pre = kernel_prefactor(i, grid.varpi()[mm]);
                        let kx = ei * grid.varpi()[mm] - ej * varpi0;
                        let ky = grid.p()[mm] - p0;
                        col.push(pre * v.ft2d(kx, ky)?);
                    }
                    out[(i - 1) as usize][(j - 1) as usize] = col;
                }
            }
            Ok(out)
        }
        Assembly::Dyson { v } => {
            dyson_source_columns(v, grid, m.domain, m.n_x, m.dyson_order, p0, varpi0)
        }
    }
}

/// Column-vector version of the Dyson recursion for a delta source at `p0`.
fn dyson_source_columns(
    v: &Potential,
    grid: &MomentumGrid,
    domain: (f64, f64),
    n_x: usize,
    order: u32,
    p0: f64,
    varpi0: f64,
) -> Result<[[Vec<Complex64>; 2]; 2], OracleError> {
    let n = grid.len();
    let (lo, hi) = domain;
    let dx = (hi - lo) / n_x as f64;
    let i_unit = Complex64::new(0.0, 1.0);
    let two_pi = 2.0 * std::f64::consts::PI;

    let zero_col = || vec![Complex64::new(0.0, 0.0); n];
    let mut cols: [[Vec<Complex64>; 2]; 2] = [
        [zero_col(), zero_col()],
        [zero_col(), zero_col()],
    ];
    let mut pcv = [zero_col(), zero_col()];
    let mut psv = [zero_col(), zero_col()];
    let mut qcv = [zero_col(), zero_col()];
    let mut qsv = [zero_col(), zero_col()];

    for s in 0..n_x {
        let x = lo + (s as f64 + 0.5) * dx;
        // A(x) applied to the delta source: direct kernel evaluation, no
        // quadrature weight.
        let mut acol = Vec::with_capacity(n);
        for mm in 0..n {
            acol.push(v.partial_ft_y(x, grid.p()[mm] - p0)? / two_pi);
        }
        let d = [d_diag(grid, 1, x), d_diag(grid, 2, x)];
        let a = if order >= 2 { Some(v_op(v, x, grid)?) } else { None };

        for j in [1u8, 2u8] {
            let ji = (j - 1) as usize;
            let ej_phase = Complex64::from_polar(1.0, eps_sign(j) * varpi0 * x);

            if let Some(a) = &a {
                let inner: Vec<Complex64> = (0..n)
                    .map(|mm| {
                        let w = grid.varpi()[mm];
                        i_unit
                            * (((w * x).sin() / w) * pcv[ji][mm]
                                - ((w * x).cos() / w) * psv[ji][mm])
                    })
                    .collect();
                let g = a.matvec(&inner);

                if order >= 3 {
                    let inner2: Vec<Complex64> = (0..n)
                        .map(|mm| {
                            let w = grid.varpi()[mm];
                            i_unit
                                * (((w * x).sin() / w) * qcv[ji][mm]
                                    - ((w * x).cos() / w) * qsv[ji][mm])
                        })
                        .collect();
                    let g2 = a.matvec(&inner2);
                    for i in [1u8, 2u8] {
                        let ii = (i - 1) as usize;
                        for mm in 0..n {
                            cols[ii][ji][mm] +=
                                Complex64::new(0.0, dx) * d[ii][mm] * g2[mm];
                        }
                    }
                    for mm in 0..n {
                        let w = grid.varpi()[mm];
                        qcv[ji][mm] += dx * (w * x).cos() * g[mm];
                        qsv[ji][mm] += dx * (w * x).sin() * g[mm];
                    }
                }

                for i in [1u8, 2u8] {
                    let ii = (i - 1) as usize;
                    for mm in 0..n {
                        cols[ii][ji][mm] -= dx * d[ii][mm] * g[mm];
                    }
                }
            }

            for i in [1u8, 2u8] {
                let ii = (i - 1) as usize;
                for mm in 0..n {
                    cols[ii][ji][mm] +=
                        Complex64::new(0.0, -dx) * d[ii][mm] * acol[mm] * ej_phase;
                }
            }

            if order >= 2 {
                for mm in 0..n {
                    let w = grid.varpi()[mm];
                    let c = acol[mm] * ej_phase;
                    pcv[ji][mm] += dx * (w * x).cos() * c;
                    psv[ji][mm] += dx * (w * x).sin() * c;
                }
            }
        }
    }
    Ok(cols)
}
