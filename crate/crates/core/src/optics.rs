//! Mapping between scattering potentials and TE-wave permittivity profiles.
//!
//! A TE wave in a nonmagnetic isotropic planar medium with relative
//! permittivity `eps(x, y)` obeys the Schrodinger-form equation with the
//! k-dependent potential
//!
//! ```text
//! v(x, y) = k^2 [1 - eps(x, y)]
//! ```
//!
//! The worked example medium is
//!
//! ```text
//! eps(x, y) = 1 + z e^{i alpha (y - x)} / [(x/a - i)(y/b + i)]^2
//! ```
//!
//! whose potential is a single separable term, so the whole engine applies.
//! The physical object is the k-independent permittivity; support
//! certificates are k-independent because the `k^2` prefactor cannot change
//! transform supports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::potentials::{Factor1D, Potential, SeparableTerm, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpticsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("profile not representable in the separable factor algebra: {0}")]
    NotRepresentable(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

/// Closed-form relative permittivity profile: baseline 1 plus a separable
/// perturbation with parameters `z`, `a`, `b`, `alpha`. `eps_inf_rel` is the
/// background permittivity relative to vacuum, used only for frequency
/// conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermittivityProfile {
    #[serde(with = "complex_pair")]
    pub z: Complex64,
    #[serde(rename = "a_um")]
    pub a: f64,
    #[serde(rename = "b_um")]
    pub b: f64,
    #[serde(rename = "alpha_rad_per_um")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub eps_inf_rel: f64,
}

fn one() -> f64 {
    1.0
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl PermittivityProfile {
    /// Pointwise relative permittivity. Tends to 1 like `r^{-2}` per factor.
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let xa = Complex64::new(x / self.a, -1.0);
        let yb = Complex64::new(y / self.b, 1.0);
        let denom = (xa * yb).powu(2);
        let phase = Complex64::from_polar(1.0, self.alpha * (y - x));
        Complex64::new(1.0, 0.0) + self.z * phase / denom
    }
}

/// The worked example profile. Vacuum background (`eps_inf_rel = 1`) unless
/// reconfigured on the returned value.
pub fn example_permittivity(
    z: Complex64,
    a: f64,
    b: f64,
    alpha: f64,
) -> Result<PermittivityProfile, OpticsError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(OpticsError::InvalidParameter(format!(
            "length scales must be positive, got a={a}, b={b}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(OpticsError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(PermittivityProfile { z, a, b, alpha, eps_inf_rel: 1.0 })
}

/// The k-dependent Schrodinger potential `v = k^2 (1 - eps)` of a profile,
/// expressed in the separable-term algebra: a single term with coupling
/// `-k^2 z`, x-factor `gbar(a, 1)` at phase `-alpha` and y-factor `g(b, 1)`
/// at phase `+alpha`. `z = 0` gives the empty potential.
pub fn potential_from_permittivity(
    prof: &PermittivityProfile,
    k: f64,
) -> Result<Potential, OpticsError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(OpticsError::InvalidParameter(format!(
            "wavenumber must be positive and finite, got {k}"
        )));
    }
    if prof.z == Complex64::new(0.0, 0.0) {
        return Ok(Potential::empty());
    }
    let xf = Factor1D::half_line(prof.a, 1, Side::Minus, -prof.alpha)
        .map_err(|e| OpticsError::NotRepresentable(e.to_string()))?;
    let yf = Factor1D::half_line(prof.b, 1, Side::Plus, prof.alpha)
        .map_err(|e| OpticsError::NotRepresentable(e.to_string()))?;
    Ok(Potential::new(vec![SeparableTerm { coupling: -k * k * prof.z, xf, yf }]))
}

/// Angular frequency and vacuum wavelength of a wave with wavenumber `k` in
/// a background of absolute permittivity `eps_inf`:
/// `omega = sqrt(eps0/eps_inf) c k`, `lambda = 2 pi / k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub omega: f64,
    pub lambda: f64,
}

pub fn wave_params(k: f64, eps0: f64, eps_inf: f64, c: f64) -> WaveParams {
    WaveParams {
        omega: (eps0 / eps_inf).sqrt() * c * k,
        lambda: 2.0 * std::f64::consts::PI / k,
    }
}

/// Rectangular sampling grid for profile export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
}

fn grid_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sample the profile on the grid as CSV `x,y,re_eps,im_eps`, row-major with
/// y as the outer loop.
pub fn export_profile(prof: &PermittivityProfile, grid: &GridSpec) -> Result<String, OpticsError> {
    if grid.nx == 0 || grid.ny == 0 {
        return Err(OpticsError::DegenerateGrid("nx and ny must be >= 1".into()));
    }
    if !(grid.x0.is_finite() && grid.x1.is_finite() && grid.y0.is_finite() && grid.y1.is_finite())
    {
        return Err(OpticsError::DegenerateGrid("grid bounds must be finite".into()));
    }
    if grid.x1 < grid.x0 || grid.y1 < grid.y0 {
        return Err(OpticsError::DegenerateGrid(
            "grid upper bounds must not be below lower bounds".into(),
        ));
    }
    let xs = grid_axis(grid.x0, grid.x1, grid.nx);
    let ys = grid_axis(grid.y0, grid.y1, grid.ny);
    let mut out = String::with_capacity(48 * (grid.nx * grid.ny + 1));
    out.push_str("x,y,re_eps,im_eps\n");
    for &y in &ys {
        for &x in &xs {
            let e = prof.eval(x, y);
            out.push_str(&crate::born::fmt_g17(x));
            out.push(',');
            out.push_str(&crate::born::fmt_g17(y));
            out.push(',');
            out.push_str(&crate::born::fmt_g17(e.re));
            out.push(',');
            out.push_str(&crate::born::fmt_g17(e.im));
            out.push('\n');
        }
    }
    Ok(out)
}
