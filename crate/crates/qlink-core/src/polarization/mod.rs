//! Polarization transformation of a satellite pass and the residual error
//! left by channel compensation.
//!
//! A pass is modeled as a time-dependent Jones matrix: two steering-mirror
//! reflections (Fresnel coefficients of the coating at the instantaneous
//! incidence angles) chained with the geometric rotations between the
//! satellite, line-of-sight, and laboratory polarization frames. The
//! compensation residual E = C_probe^-1 C_signal, reduced to its unitary
//! part, feeds the BB84 error-probability average.

mod mirror;
mod pass;
mod schemes;
mod vec3;

pub use mirror::{aluminum_like, fresnel_reflection, MirrorModel, RefractiveIndexTable};
pub use pass::{PassGeometry, PassModel};
pub use schemes::{
    probe_wavelength_qber, stokes_series, stokes_statistics, time_multiplexed_qber,
    DerivativeStats, StokesComponent, StokesSeries,
};
pub use vec3::Vec3;

use crate::jones::{Jones, JonesError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolarizationError {
    #[error("pass geometry: {0}")]
    Geometry(String),
    #[error("t = {t} s outside the pass window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },
    #[error("wavelength {nm} nm outside the index table range [{lo}, {hi}] nm")]
    WavelengthOutOfRange { nm: f64, lo: f64, hi: f64 },
    #[error("mirror description: {0}")]
    InvalidMirror(String),
    #[error(transparent)]
    Jones(#[from] JonesError),
}

/// Residual operator after compensating `signal` with the channel measured
/// as `probe`: the unitary part of C_probe^-1 C_signal. Perfect
/// compensation returns the identity regardless of common attenuation.
pub fn compensation_residual(
    probe: &Jones,
    signal: &Jones,
) -> Result<Jones, PolarizationError> {
    Ok(probe.inverse()?.mul(signal).polar_unitary()?)
}

/// BB84 error probability of one residual operator, with the four signal
/// states sent at the standard weights (H with probability 1/4, V with
/// 1/4, the diagonal pair sharing the rest).
pub fn qber_from_residual(e: &Jones) -> f64 {
    let e11 = e.m[0][0];
    let e12 = e.m[0][1];
    let e21 = e.m[1][0];
    let e22 = e.m[1][1];
    let avg = 3.0 * e11.norm_sqr()
        + 3.0 * e22.norm_sqr()
        + e21.norm_sqr()
        + e12.norm_sqr()
        + 2.0 * (e11.conj() * e22).re
        + 2.0 * (e12.conj() * e21).re;
    (1.0 - avg / 8.0).clamp(0.0, 1.0)
}

/// Error probability averaged over a series of residuals; empty input
/// counts as perfectly compensated.
pub fn qber_from_residuals<'a, I>(residuals: I) -> f64
where
    I: IntoIterator<Item = &'a Jones>,
{
    let mut acc = 0.0;
    let mut n = 0usize;
    for e in residuals {
        acc += qber_from_residual(e);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        acc / n as f64
    }
}

/// Probe repetition rate needed to keep the linearized Stokes excursion
/// between measurements below `delta_s_max` when the channel drifts at up
/// to `dsdt_max` (1/s).
pub fn required_probe_rate(delta_s_max: f64, dsdt_max: f64) -> Result<f64, PolarizationError> {
    if !(delta_s_max.is_finite() && delta_s_max > 0.0 && dsdt_max.is_finite() && dsdt_max > 0.0)
    {
        return Err(PolarizationError::Geometry(format!(
            "probe-rate sizing needs positive inputs, got delta_s_max = {delta_s_max}, dsdt_max = {dsdt_max}"
        )));
    }
    Ok(dsdt_max / delta_s_max)
}
