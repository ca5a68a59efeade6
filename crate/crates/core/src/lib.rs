//! Two-dimensional complex-potential scattering engine.
//!
//! The crate constructs separable complex potentials whose Fourier transform
//! is confined to half-lines, which makes the first Born approximation the
//! *exact* scattering amplitude for all wavenumbers up to a critical value
//! `alpha`, and makes broadband one-sided invisibility constructive:
//!
//! * [`potentials`] — the separable-term algebra, closed-form and quadrature
//!   Fourier transforms, and machine-checkable support certification,
//! * [`born`] — first-Born amplitudes (generic, quadrature-backed, and the
//!   closed-form worked example) plus amplitude sweeps,
//! * [`oracle`] — a brute-force transfer-matrix / Dyson-series oracle on a
//!   discretized momentum space that verifies the exactness claims and
//!   exposes their breakdown above the critical wavenumber,
//! * [`invisibility`] — one-sided invisibility verdicts, angular windows, and
//!   numerical verification reports,
//! * [`optics`] — the mapping between scattering potentials and TE-wave
//!   relative permittivity profiles.
//!
//! Lengths are micrometers and wavenumbers rad/um throughout.

pub mod born;
pub mod invisibility;
pub mod optics;
pub mod oracle;
pub mod potentials;
pub mod quad;
