//! Scattering data from an assembled transfer matrix.
//!
//! With a plane-wave source at transverse momentum `p0 = k sin(theta0)`, the
//! outgoing data are functions `T_-` and `T_+` on the propagating band. The
//! defining relations are linear integral equations driven by delta sources;
//! writing `T = 2 pi c delta(p - p0) + t(p)` and matching singular parts
//! forces `c = 0` here (the right-hand sides are smooth kernel columns), so
//! the smooth part solves a dense linear system:
//!
//! ```text
//! left  source:  M22 t_- = -2 pi (M21 delta_{p0}),   t_+ = M12 t_- + 2 pi (M11 - I) delta_{p0}
//! right source:  M22 t_- = -2 pi ((M22 - I) delta_{p0}),  t_+ = M12 [t_- + 2 pi delta_{p0}]
//! ```
//!
//! The delta columns are direct kernel evaluations at `p0`, never grid
//! interpolation. In the exactness band the iteration matrix annihilates the
//! source column, so `t_-` reduces to the closed form `-2 pi` times the
//! kernel column — which is what the tests pin down.
//!
//! Amplitudes follow from
//!
//! ```text
//! f(theta) = -i k |cos theta| / sqrt(2 pi) * T_{-+}(k sin theta)
//! ```
//!
//! with `T_-` for `cos theta < 0` and `T_+` for `cos theta > 0`; grazing
//! directions `|cos theta| < 1e-3` are excluded (the formula branches at
//! cos theta = 0 and the physical prefactor vanishes there).

use num_complex::Complex64;

use crate::born::{IncidenceSide, IncidenceSpec};

use super::dyson::TransferMatrixNum;
use super::kernel_columns;
use super::OracleError;

const SQRT_TWO_PI: f64 = 2.506628274631000502415765284811;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Cosine cutoff below which a direction counts as grazing.
pub const GRAZING_COS_CUTOFF: f64 = 1e-3;

/// Smooth parts of the outgoing momentum functions plus the (identically
/// zero here) singular coefficients multiplying `2 pi delta(p - p0)`.
#[derive(Debug, Clone)]
pub struct TFunctions {
    pub side: IncidenceSide,
    pub p0: f64,
    pub k: f64,
    pub t_minus: Vec<Complex64>,
    pub t_plus: Vec<Complex64>,
    pub delta_minus: Complex64,
    pub delta_plus: Complex64,
    grid: super::grid::MomentumGrid,
}

impl TFunctions {
    pub fn grid(&self) -> &super::grid::MomentumGrid {
        &self.grid
    }
}

/// Solve the outgoing functions for the given incidence.
pub fn solve_t(
    m: &TransferMatrixNum,
    inc: &IncidenceSpec,
) -> Result<TFunctions, OracleError> {
    let grid = m.grid();
    let k = grid.k();
    if (inc.k() - k).abs() > 1e-9 * k {
        return Err(OracleError::IncidenceMismatch { expected: k, got: inc.k() });
    }
    let p0 = k * inc.theta0().sin();
    // Incidence validity guarantees cos(theta0) != 0, so |p0| < k strictly.
    debug_assert!(p0.abs() < k);

    let cols = kernel_columns(m, p0)?;
    let col = |i: usize, j: usize| -> &Vec<Complex64> { &cols[i - 1][j - 1] };

    let rhs: Vec<Complex64> = match inc.side() {
        IncidenceSide::Left => col(2, 1).iter().map(|c| -TWO_PI * c).collect(),
        IncidenceSide::Right => col(2, 2).iter().map(|c| -TWO_PI * c).collect(),
    };
    // Kernels and solutions grow like 1/varpi toward the band edges, where
    // the grid clusters; solve in the symmetrized variables
    // u = sqrt(varpi) t so the system stays well-conditioned as the grid is
    // refined. sqrt(varpi_m/varpi_n) rescaling leaves the solution exact.
    let sq: Vec<f64> = grid.varpi().iter().map(|w| w.sqrt()).collect();
    let n = grid.len();
    let mut m22_sym = m.block(2, 2).clone();
    for i in 0..n {
        for j in 0..n {
            let v = m22_sym.at(i, j) * (sq[i] / sq[j]);
            m22_sym.set(i, j, v);
        }
    }
    let rhs_sym: Vec<Complex64> =
        rhs.iter().zip(&sq).map(|(r, s)| r * *s).collect();
    let u = m22_sym.solve(&rhs_sym).map_err(|_| OracleError::SingularM22)?;
    let t_minus: Vec<Complex64> = u.iter().zip(&sq).map(|(u, s)| u / *s).collect();
    let m12_t = m.block(1, 2).matvec(&t_minus);
    let t_plus: Vec<Complex64> = match inc.side() {
        IncidenceSide::Left => m12_t
            .iter()
            .zip(col(1, 1))
            .map(|(a, c)| a + TWO_PI * c)
            .collect(),
        IncidenceSide::Right => m12_t
            .iter()
            .zip(col(1, 2))
            .map(|(a, c)| a + TWO_PI * c)
            .collect(),
    };

    Ok(TFunctions {
        side: inc.side(),
        p0,
        k,
        t_minus,
        t_plus,
        delta_minus: Complex64::new(0.0, 0.0),
        delta_plus: Complex64::new(0.0, 0.0),
        grid: grid.clone(),
    })
}

/// Scattering amplitude at polar angle `theta` from solved outgoing
/// functions. The smooth part is evaluated by barycentric interpolation on
/// the grid (exact at grid-aligned directions); the delta part lives only at
/// the measure-zero forward/backward directions and is reported separately
/// in [`TFunctions`].
///
/// The outgoing functions diverge like `1/varpi(p)` toward the band edges
/// (the amplitude stays finite because of the `k |cos theta|` prefactor), so
/// what gets interpolated is the bounded combination
/// `u(p) = varpi(p) T(p)`, and `f = -i u(k sin theta) / sqrt(2 pi)`.
pub fn amplitude_from_t(t: &TFunctions, k: f64, theta: f64) -> Result<Complex64, OracleError> {
    if (k - t.k).abs() > 1e-9 * t.k {
        return Err(OracleError::IncidenceMismatch { expected: t.k, got: k });
    }
    let c = theta.cos();
    if c.abs() < GRAZING_COS_CUTOFF {
        return Err(OracleError::GrazingDirection { cos_theta: c });
    }
    let gamma = theta.sin().asin(); // angle coordinate of p = k sin(theta)
    let samples = if c < 0.0 { &t.t_minus } else { &t.t_plus };
    let weighted: Vec<Complex64> = samples
        .iter()
        .zip(t.grid.varpi())
        .map(|(v, w)| v * w)
        .collect();
    let u = t.grid.interp_gamma(&weighted, gamma);
    Ok(Complex64::new(0.0, -1.0 / SQRT_TWO_PI) * u)
}

/// Scattering directions aligned with the grid nodes: for each node angle
/// `gamma_m` the forward direction `theta = gamma_m` and the backward
/// direction `theta = pi - gamma_m`. At these angles the interpolation in
/// [`amplitude_from_t`] is nodal-exact. Grazing nodes are filtered.
pub fn grid_aligned_thetas(grid: &super::grid::MomentumGrid) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for &g in grid.gamma() {
        if g.cos() < GRAZING_COS_CUTOFF {
            continue;
        }
        out.push(if g >= 0.0 { g } else { g + TWO_PI });
        out.push(std::f64::consts::PI - g);
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::{born_amplitude, IncidenceSide, IncidenceSpec};
    use crate::oracle::{default_domain, dyson, first_order_m, make_grid};
    use crate::optics;
    use crate::potentials::Potential;

    const ALPHA: f64 = 2.0 * std::f64::consts::PI / 0.5;

    fn example_potential(k: f64) -> Potential {
        let prof =
            optics::example_permittivity(Complex64::new(1.0, 0.0), 1.0, 1.0, ALPHA).unwrap();
        optics::potential_from_permittivity(&prof, k).unwrap()
    }

    #[test]
    fn zero_potential_scatters_nothing() {
        let k = 1.0;
        let grid = make_grid(k, 16).unwrap();
        let m = dyson(&Potential::empty(), &grid, (-1.0, 1.0), 16, 2).unwrap();
        for (side, theta0) in
            [(IncidenceSide::Left, 0.4), (IncidenceSide::Right, 2.8)]
        {
            let inc = IncidenceSpec::new(side, theta0, k).unwrap();
            let t = solve_t(&m, &inc).unwrap();
            assert!(t.t_minus.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
            assert!(t.t_plus.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
            assert_eq!(t.delta_minus, Complex64::new(0.0, 0.0));
            for theta in [0.3, 1.9, 3.4, 5.1] {
                assert_eq!(
                    amplitude_from_t(&t, k, theta).unwrap(),
                    Complex64::new(0.0, 0.0)
                );
            }
        }
    }

    #[test]
    fn exact_regime_solution_is_kernel_column() {
        // In the band the solve must reproduce t_- = -2 pi (M21 delta_{p0}).
        let k = 0.9 * ALPHA;
        let v = example_potential(k);
        let grid = make_grid(k, 48).unwrap();
        let m = first_order_m(&v, &grid, ALPHA).unwrap();
        let inc =
            IncidenceSpec::new(IncidenceSide::Left, -std::f64::consts::FRAC_PI_4, k).unwrap();
        let t = solve_t(&m, &inc).unwrap();
        let cols = super::super::kernel_columns(&m, t.p0).unwrap();
        let mut max_rel = 0.0f64;
        let mut scale = 0.0f64;
        for (got, want) in t.t_minus.iter().zip(&cols[1][0]) {
            let want = -TWO_PI * want;
            scale = scale.max(want.norm());
            max_rel = max_rel.max((got - want).norm());
        }
        assert!(scale > 0.0);
        assert!(max_rel <= 1e-8 * scale, "max deviation {max_rel:.3e} vs scale {scale:.3e}");
    }

    #[test]
    fn oracle_amplitude_matches_born_in_band() {
        // At grid-aligned directions the first-order oracle reproduces the
        // closed-form first-Born amplitude to machine precision.
        let k = 2.0 * std::f64::consts::PI / 0.55;
        let v = example_potential(k);
        let grid = make_grid(k, 64).unwrap();
        let m = first_order_m(&v, &grid, ALPHA).unwrap();
        let inc =
            IncidenceSpec::new(IncidenceSide::Left, -std::f64::consts::FRAC_PI_4, k).unwrap();
        let t = solve_t(&m, &inc).unwrap();
        let mut checked = 0;
        let mut peak = 0.0f64;
        for theta in grid_aligned_thetas(&grid) {
            let f_born = born_amplitude(&v, &inc, theta).unwrap();
            peak = peak.max(f_born.norm());
        }
        assert!(peak > 0.0);
        for theta in grid_aligned_thetas(&grid) {
            let f_oracle = amplitude_from_t(&t, k, theta).unwrap();
            let f_born = born_amplitude(&v, &inc, theta).unwrap();
            assert!(
                (f_oracle - f_born).norm() <= 1e-6 * peak,
                "theta={theta}: oracle {f_oracle} vs born {f_born}"
            );
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn right_incidence_dark_in_band() {
        let k = 0.95 * ALPHA;
        let v = example_potential(k);
        let grid = make_grid(k, 48).unwrap();
        let m = first_order_m(&v, &grid, ALPHA).unwrap();
        // Left incidence sets the amplitude scale.
        let inc_l =
            IncidenceSpec::new(IncidenceSide::Left, -std::f64::consts::FRAC_PI_4, k).unwrap();
        let t_l = solve_t(&m, &inc_l).unwrap();
        let scale = grid_aligned_thetas(&grid)
            .iter()
            .map(|&th| amplitude_from_t(&t_l, k, th).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(scale > 0.0);
        for theta0 in [0.8 * std::f64::consts::PI, std::f64::consts::PI, 1.3 * std::f64::consts::PI]
        {
            let inc = IncidenceSpec::new(IncidenceSide::Right, theta0, k).unwrap();
            let t = solve_t(&m, &inc).unwrap();
            let max_fr = grid_aligned_thetas(&grid)
                .iter()
                .map(|&th| amplitude_from_t(&t, k, th).unwrap().norm())
                .fold(0.0, f64::max);
            assert!(max_fr <= 1e-8 * scale, "max |f_r| = {max_fr:.3e}, scale {scale:.3e}");
        }
    }

    #[test]
    fn breakdown_above_band() {
        // Above the critical wavenumber the order-2 solution departs from
        // the first-Born closed form.
        let k = 1.5 * ALPHA;
        let v = example_potential(k);
        let grid = make_grid(k, 48).unwrap();
        let domain = default_domain(&v, k, 1200).unwrap();
        let m = dyson(&v, &grid, domain, 1200, 2).unwrap();
        let inc =
            IncidenceSpec::new(IncidenceSide::Left, -std::f64::consts::FRAC_PI_4, k).unwrap();
        let t = solve_t(&m, &inc).unwrap();
        let mut worst_rel: f64 = 0.0;
        for theta in grid_aligned_thetas(&grid) {
            let f_born = born_amplitude(&v, &inc, theta).unwrap();
            if f_born.norm() < 1e-6 {
                continue;
            }
            let f_oracle = amplitude_from_t(&t, k, theta).unwrap();
            worst_rel = worst_rel.max((f_oracle - f_born).norm() / f_born.norm());
        }
        assert!(worst_rel > 1e-3, "worst relative deviation {worst_rel:.3e}");
    }

    #[test]
    fn grazing_directions_rejected() {
        let k = 1.0;
        let grid = make_grid(k, 16).unwrap();
        let m = dyson(&Potential::empty(), &grid, (-1.0, 1.0), 8, 1).unwrap();
        let inc = IncidenceSpec::new(IncidenceSide::Left, 0.1, k).unwrap();
        let t = solve_t(&m, &inc).unwrap();
        let err = amplitude_from_t(&t, k, std::f64::consts::FRAC_PI_2).unwrap_err();
        assert!(matches!(err, OracleError::GrazingDirection { .. }));
        // Mismatched wavenumber is refused.
        assert!(matches!(
            amplitude_from_t(&t, 2.0, 0.3),
            Err(OracleError::IncidenceMismatch { .. })
        ));
    }

    #[test]
    fn grid_aligned_directions_cover_both_branches() {
        let grid = make_grid(1.0, 24).unwrap();
        let thetas = grid_aligned_thetas(&grid);
        assert_eq!(thetas.len(), 2 * grid.len());
        assert!(thetas.iter().any(|t| t.cos() > 0.0));
        assert!(thetas.iter().any(|t| t.cos() < 0.0));
        assert!(thetas.iter().all(|t| t.cos().abs() >= GRAZING_COS_CUTOFF));
        assert!(thetas.windows(2).all(|w| w[0] <= w[1]));
    }
}
