//! Brute-force transfer-matrix oracle on a discretized momentum space.
//!
//! The scattering problem is recast as a 2x2 matrix of integral operators on
//! the propagating band `p in (-k, k)` (the transfer matrix), expressed as
//! an x-ordered exponential of an effective Hamiltonian. This module
//! discretizes that formalism with no reference to the Born formula, which
//! makes it an independent oracle: truncating the ordered series at first
//! order must reproduce the first-Born amplitudes exactly for certified
//! potentials with `k <= alpha`, the second-order correction must vanish
//! there, and both statements must fail visibly for `k > alpha`.
//!
//! Submodules: [`grid`] (the momentum quadrature), `linalg` (dense complex
//! matrices), [`operators`] (the potential and Hamiltonian kernels),
//! [`dyson`] (series assembly) and [`solve`] (outgoing waves and
//! amplitudes).

pub mod grid;
pub mod linalg;
pub mod operators;

mod dyson;
mod solve;

use serde::{Deserialize, Serialize};

pub use dyson::{
    default_domain, dyson, first_order_m, thm2_products, Thm2Check, TransferMatrixNum,
};
pub use grid::{make_grid, MomentumGrid};
pub use linalg::CMat;
pub use operators::{eps_sign, h_op, v_op};
pub use solve::{
    amplitude_from_t, grid_aligned_thetas, solve_t, TFunctions, GRAZING_COS_CUTOFF,
};

pub(crate) use dyson::kernel_columns;

use crate::potentials::PotentialError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("momentum grid too small: {n} nodes (minimum {min})")]
    GridTooSmall { n: usize, min: usize },
    #[error("unsupported Dyson order {0}: cost grows as Nx^order, capped at 3")]
    UnsupportedOrder(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exactness preconditions unmet: {0}")]
    ExactnessPreconditionsUnmet(String),
    #[error(
        "M22 not invertible on grid: either the potential has a genuine spectral \
         singularity at this wavenumber or the discretization is too coarse; refine \
         the grid or perturb k to distinguish"
    )]
    SingularM22,
    #[error("grazing direction: |cos theta| = {cos_theta:.3e} below cutoff")]
    GrazingDirection { cos_theta: f64 },
    #[error("incidence wavenumber {got} does not match the grid wavenumber {expected}")]
    IncidenceMismatch { expected: f64, got: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// One row of the oracle report, serialized with the fixed key set
/// `{"k", "alpha", "N", "Nx", "order2_rel_norm", "thm2_max_product_norm",
/// "max_abs_fr"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReportRow {
    pub k: f64,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Nx")]
    pub nx: usize,
    pub order2_rel_norm: f64,
    pub thm2_max_product_norm: f64,
    pub max_abs_fr: f64,
}
