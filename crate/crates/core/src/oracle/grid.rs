//! Discretization of the propagating momentum space.
//!
//! Functions live on `p in (-k, k)`; the longitudinal wavenumber
//! `varpi(p) = sqrt(k^2 - p^2)` vanishes at the endpoints and enters kernels
//! as `1/varpi`, so a uniform grid in `p` is useless there. Parametrizing
//! `p = k sin(gamma)` with Gauss-Legendre nodes in `gamma in (-pi/2, pi/2)`
//! absorbs the endpoint singularity into the Jacobian `k cos(gamma)` and
//! keeps all nodes strictly interior.

use crate::quad::{Barycentric, GaussLegendre};

use super::OracleError;

/// Quadrature grid on the propagating band `p in (-k, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    k: f64,
    gamma: Vec<f64>,
    p: Vec<f64>,
    weights: Vec<f64>,
    varpi: Vec<f64>,
    bary: Barycentric,
}

/// Build an `n`-node grid at wavenumber `k`. Weights include the Jacobian,
/// so `sum w_m f(p_m)` approximates `int_{-k}^{k} f(p) dp`.
pub fn make_grid(k: f64, n: usize) -> Result<MomentumGrid, OracleError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(OracleError::InvalidParameter(format!(
            "wavenumber must be positive and finite, got {k}"
        )));
    }
    if n < 8 {
        return Err(OracleError::GridTooSmall { n, min: 8 });
    }
    let rule = GaussLegendre::new(n);
    let half_pi = 0.5 * std::f64::consts::PI;
    let gamma: Vec<f64> = rule.nodes().iter().map(|t| half_pi * t).collect();
    let p: Vec<f64> = gamma.iter().map(|g| k * g.sin()).collect();
    let varpi: Vec<f64> = gamma.iter().map(|g| k * g.cos()).collect();
    let weights: Vec<f64> = rule
        .weights()
        .iter()
        .zip(&varpi)
        .map(|(u, w)| u * half_pi * w)
        .collect();
    // Interpolation runs in the reference coordinate t = gamma/(pi/2); the
    // explicit Gauss-Legendre barycentric weights are valid there.
    let bary = Barycentric::for_gauss_legendre(&rule);
    Ok(MomentumGrid { k, gamma, p, weights, varpi, bary })
}

impl MomentumGrid {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn varpi(&self) -> &[f64] {
        &self.varpi
    }

    /// Barycentric interpolation of grid samples at angle coordinate
    /// `gamma in (-pi/2, pi/2)`.
    pub fn interp_gamma(
        &self,
        values: &[num_complex::Complex64],
        gamma: f64,
    ) -> num_complex::Complex64 {
        self.bary.eval(values, gamma / (0.5 * std::f64::consts::PI))
    }

    /// Interpolation at momentum `p = k sin(gamma)`, `|p| < k`.
    pub fn interp_p(&self, values: &[num_complex::Complex64], p: f64) -> num_complex::Complex64 {
        let s = (p / self.k).clamp(-1.0, 1.0);
        self.interp_gamma(values, s.asin())
    }
}
