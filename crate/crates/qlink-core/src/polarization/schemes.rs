//! The two channel-compensation schemes and the Stokes drift statistics
//! that size them.
//!
//! Probe-wavelength scheme: a classical probe at `probe_wavelength`
//! co-propagates with the signal; the measured probe matrix compensates
//! the signal, leaving the chromatic residual E = C(probe)^-1 C(signal).
//!
//! Time-multiplexed scheme: the channel is probed at rate f_P at the
//! signal wavelength; each measurement compensates the N subsequent signal
//! pulses, leaving the staleness residual E = C(t_m)^-1 C(t_m + i delta).

use super::mirror::MirrorModel;
use super::pass::PassGeometry;
use super::{compensation_residual, qber_from_residual, PolarizationError};
use crate::jones::{Jones, JonesVector};
use crate::numeric::{sample_derivative, symmetric_histogram};

/// Residual error rate of probe-wavelength compensation, averaged over
/// every time sample of every pass in the ensemble.
pub fn probe_wavelength_qber(
    passes: &[PassGeometry],
    mirror: &MirrorModel,
    step: f64,
    signal_wavelength: f64,
    probe_wavelength: f64,
) -> Result<f64, PolarizationError> {
    let mut acc = 0.0;
    let mut count = 0usize;
    for pass in passes {
        for t in pass.sample_times(step) {
            let signal = pass.channel_jones(t, signal_wavelength, mirror)?;
            let probe = pass.channel_jones(t, probe_wavelength, mirror)?;
            let residual = compensation_residual(&probe, &signal)?;
            acc += qber_from_residual(&residual);
            count += 1;
        }
    }
    ensemble_average(acc, count)
}

/// Residual error rate of time-multiplexed compensation at probe rate
/// `probe_rate`, with `pulses_per_interval` signal pulses following each
/// probe measurement. Long windows are subsampled to at most
/// `max_intervals` probe intervals per pass, at a deterministic stride.
pub fn time_multiplexed_qber(
    passes: &[PassGeometry],
    mirror: &MirrorModel,
    wavelength: f64,
    probe_rate: f64,
    pulses_per_interval: usize,
    max_intervals: usize,
) -> Result<f64, PolarizationError> {
    let mut acc = 0.0;
    let mut count = 0usize;
    for pass in passes {
        let (averaged, n) = multiplexed_over(
            pass.window(),
            |t| pass.channel_jones(t, wavelength, mirror),
            probe_rate,
            pulses_per_interval,
            max_intervals,
        )?;
        acc += averaged;
        count += n;
    }
    ensemble_average(acc, count)
}

/// Sum of per-pulse error rates and the pulse count for one channel.
fn multiplexed_over(
    window: (f64, f64),
    channel: impl Fn(f64) -> Result<Jones, PolarizationError>,
    probe_rate: f64,
    pulses_per_interval: usize,
    max_intervals: usize,
) -> Result<(f64, usize), PolarizationError> {
    if !(probe_rate.is_finite() && probe_rate > 0.0) {
        return Err(PolarizationError::Geometry(format!(
            "probe rate must be positive, got {probe_rate}"
        )));
    }
    if pulses_per_interval == 0 || max_intervals == 0 {
        return Err(PolarizationError::Geometry(
            "need at least one pulse per interval and one interval".into(),
        ));
    }
    let (start, end) = window;
    let delta = 1.0 / (probe_rate * pulses_per_interval as f64);
    // Keep every pulse of an interval inside the window: the last pulse
    // sits a full probe period after the measurement.
    let intervals = ((end - start) * probe_rate).floor().max(1.0) as usize;
    let stride = intervals.div_ceil(max_intervals).max(1);

    let mut acc = 0.0;
    let mut count = 0usize;
    for m in (0..intervals).step_by(stride) {
        let t_probe = start + m as f64 / probe_rate;
        let measured = channel(t_probe)?;
        for i in 1..=pulses_per_interval {
            let t_pulse = (t_probe + i as f64 * delta).min(end);
            let actual = channel(t_pulse)?;
            let residual = compensation_residual(&measured, &actual)?;
            acc += qber_from_residual(&residual);
            count += 1;
        }
    }
    Ok((acc, count))
}

fn ensemble_average(acc: f64, count: usize) -> Result<f64, PolarizationError> {
    if count == 0 {
        return Err(PolarizationError::Geometry(
            "empty pass ensemble yields no samples".into(),
        ));
    }
    Ok(acc / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StokesComponent {
    S1,
    S2,
    S3,
}

impl StokesComponent {
    pub fn index(self) -> usize {
        match self {
            StokesComponent::S1 => 0,
            StokesComponent::S2 => 1,
            StokesComponent::S3 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StokesComponent::S1 => "s1",
            StokesComponent::S2 => "s2",
            StokesComponent::S3 => "s3",
        }
    }
}

/// Stokes trajectory of a fixed input state through one pass, with
/// numerical time derivatives.
#[derive(Debug, Clone)]
pub struct StokesSeries {
    pub times: Vec<f64>,
    /// S1, S2, S3 per sample; pure states keep each on the unit sphere.
    pub s: [Vec<f64>; 3],
    pub ds_dt: [Vec<f64>; 3],
}

impl StokesSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Propagates `input` through the channel at each sample time and records
/// the (renormalized) output Stokes vector and its drift rate.
pub fn stokes_series(
    pass: &PassGeometry,
    mirror: &MirrorModel,
    wavelength: f64,
    input: &JonesVector,
    step: f64,
) -> Result<StokesSeries, PolarizationError> {
    stokes_over(pass.sample_times(step), |t| {
        pass.channel_jones(t, wavelength, mirror)
    })
    .map(|f| f(input))
}

fn stokes_over(
    times: Vec<f64>,
    channel: impl Fn(f64) -> Result<Jones, PolarizationError>,
) -> Result<impl FnOnce(&JonesVector) -> StokesSeries, PolarizationError> {
    let matrices: Vec<Jones> = times
        .iter()
        .map(|&t| channel(t))
        .collect::<Result<_, _>>()?;
    Ok(move |input: &JonesVector| {
        let mut s = [
            Vec::with_capacity(times.len()),
            Vec::with_capacity(times.len()),
            Vec::with_capacity(times.len()),
        ];
        for c in &matrices {
            let out = c.apply(input).normalized().stokes();
            for j in 0..3 {
                s[j].push(out[j]);
            }
        }
        let ds_dt = [
            sample_derivative(&times, &s[0]),
            sample_derivative(&times, &s[1]),
            sample_derivative(&times, &s[2]),
        ];
        StokesSeries { times, s, ds_dt }
    })
}

/// Drift-rate statistics of one Stokes component pooled over an ensemble.
#[derive(Debug, Clone)]
pub struct DerivativeStats {
    pub component: StokesComponent,
    /// Largest |dS/dt| seen anywhere in the ensemble (1/s).
    pub max_abs: f64,
    pub samples: usize,
    /// (bin center, count) over a symmetric range [-max_abs, max_abs].
    pub histogram: Vec<(f64, u64)>,
}

pub fn stokes_statistics(
    passes: &[PassGeometry],
    mirror: &MirrorModel,
    wavelength: f64,
    input: &JonesVector,
    step: f64,
    component: StokesComponent,
    bins: usize,
) -> Result<DerivativeStats, PolarizationError> {
    if bins == 0 {
        return Err(PolarizationError::Geometry(
            "histogram needs at least one bin".into(),
        ));
    }
    let mut pooled = Vec::new();
    for pass in passes {
        let series = stokes_series(pass, mirror, wavelength, input, step)?;
        pooled.extend_from_slice(&series.ds_dt[component.index()]);
    }
    if pooled.is_empty() {
        return Err(PolarizationError::Geometry(
            "empty pass ensemble yields no samples".into(),
        ));
    }
    let max_abs = pooled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(DerivativeStats {
        component,
        max_abs,
        samples: pooled.len(),
        histogram: symmetric_histogram(&pooled, bins),
    })
}
