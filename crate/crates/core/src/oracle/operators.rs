//! Discretized potential and effective-Hamiltonian operators.
//!
//! On the momentum grid, the potential acts at fixed `x` through its partial
//! y-transform,
//!
//! ```text
//! [A(x)]_{mn} = (1/2 pi) FT_y v(x, p_m - p_n) w_n
//! ```
//!
//! and the 2x2-block effective Hamiltonian entries are diagonal dressings of
//! the same matrix,
//!
//! ```text
//! H_ij(x) = D_i(x) A(x) E_j(x)
//! D_i = diag(eps_i e^{-i eps_i varpi_m x} / (2 varpi_m)),
//! E_j = diag(e^{+i eps_j varpi_n x}),        eps_i = (-1)^{i-1}
//! ```

use num_complex::Complex64;

use crate::potentials::Potential;

use super::grid::MomentumGrid;
use super::linalg::CMat;
use super::OracleError;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `eps_i = (-1)^{i-1}` for block index `i in {1, 2}`.
pub fn eps_sign(i: u8) -> f64 {
    debug_assert!(i == 1 || i == 2);
    if i == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Momentum-space potential operator at slice `x`.
pub fn v_op(v: &Potential, x: f64, grid: &MomentumGrid) -> Result<CMat, OracleError> {
    let n = grid.len();
    // Evaluate the x-dependent part once per term.
    let xvals: Vec<Complex64> =
        v.terms().iter().map(|t| t.coupling * t.xf.eval(x)).collect();
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let ky = grid.p()[i] - grid.p()[j];
            let mut ft = Complex64::new(0.0, 0.0);
            for (t, xv) in v.terms().iter().zip(&xvals) {
                ft += xv * t.yf.ft_closed(ky)?;
            }
            m.set(i, j, ft * (grid.weights()[j] / TWO_PI));
        }
    }
    Ok(m)
}

/// Left dressing `D_i(x)` as a diagonal.
pub(super) fn d_diag(grid: &MomentumGrid, i: u8, x: f64) -> Vec<Complex64> {
    let ei = eps_sign(i);
    grid.varpi()
        .iter()
        .map(|&w| Complex64::from_polar(1.0, -ei * w * x) * (ei / (2.0 * w)))
        .collect()
}

/// Right dressing `E_j(x)` as a diagonal.
pub(super) fn e_diag(grid: &MomentumGrid, j: u8, x: f64) -> Vec<Complex64> {
    let ej = eps_sign(j);
    grid.varpi()
        .iter()
        .map(|&w| Complex64::from_polar(1.0, ej * w * x))
        .collect()
}

/// Effective-Hamiltonian block `H_ij(x)` on the grid.
pub fn h_op(
    v: &Potential,
    x: f64,
    grid: &MomentumGrid,
    i: u8,
    j: u8,
) -> Result<CMat, OracleError> {
    let a = v_op(v, x, grid)?;
    Ok(a.rows_scaled(&d_diag(grid, i, x)).cols_scaled(&e_diag(grid, j, x)))
}
