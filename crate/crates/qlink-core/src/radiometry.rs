//! Background photon budgets for the optical channel.
//!
//! Uplink noise is sunlight (or moonlight) diffused by the Earth into the
//! satellite receiver's field of view. Downlink noise is the sky radiance
//! seen by the ground telescope. Both reduce to closed-form products of the
//! receiver geometry and a radiance constant; the interesting part is
//! keeping the unit conventions straight, which are documented per field.

use crate::constants::photon_energy;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RadiometryError {
    #[error("invalid noise environment: {0}")]
    InvalidEnvironment(String),
    #[error("invalid filter window: {0}")]
    InvalidWindow(String),
    #[error("negative rate: {0}")]
    NegativeRate(f64),
}

/// Radiance constants of the scene around the link.
#[derive(Debug, Clone, Copy)]
pub struct NoiseEnvironment {
    /// Solar spectral irradiance at the top of the atmosphere,
    /// photons s^-1 nm^-1 m^-2.
    pub h_sun: f64,
    /// Earth albedo.
    pub a_earth: f64,
    /// Moon albedo.
    pub a_moon: f64,
    /// Moon radius, m.
    pub r_moon: f64,
    /// Earth-Moon distance, m.
    pub d_earth_moon: f64,
    /// Ground temperature for thermal emission, K.
    pub temperature: f64,
    /// Sky spectral radiance seen by the ground telescope,
    /// W m^-2 sr^-1 um^-1. Scenario input; varies from ~1e-5 (moonless
    /// night) to ~1e1 (daylight).
    pub sky_radiance: f64,
}

impl Default for NoiseEnvironment {
    fn default() -> Self {
        NoiseEnvironment {
            h_sun: 4.61e18,
            a_earth: 0.3,
            a_moon: 0.12,
            r_moon: 1.7374e6,
            d_earth_moon: 3.844e8,
            temperature: 293.0,
            sky_radiance: 1.5e-5,
        }
    }
}

impl NoiseEnvironment {
    pub fn validate(&self) -> Result<(), RadiometryError> {
        let albedo = |v: f64, name: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(RadiometryError::InvalidEnvironment(format!(
                    "{name} must lie in [0, 1], got {v}"
                )))
            }
        };
        albedo(self.a_earth, "a_earth")?;
        albedo(self.a_moon, "a_moon")?;
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(RadiometryError::InvalidEnvironment(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive(self.h_sun, "h_sun")?;
        positive(self.r_moon, "r_moon")?;
        positive(self.d_earth_moon, "d_earth_moon")?;
        positive(self.temperature, "temperature")?;
        if !(self.sky_radiance >= 0.0 && self.sky_radiance.is_finite()) {
            return Err(RadiometryError::InvalidEnvironment(format!(
                "sky_radiance must be non-negative, got {}",
                self.sky_radiance
            )));
        }
        Ok(())
    }
}

/// Spectral and temporal filtering applied in front of the detector.
#[derive(Debug, Clone, Copy)]
pub struct FilterWindow {
    /// Optical bandwidth, nm.
    pub bandwidth_nm: f64,
    /// Detector gate time, s.
    pub gate: f64,
}

impl Default for FilterWindow {
    fn default() -> Self {
        FilterWindow {
            bandwidth_nm: 1.0,
            gate: 1e-9,
        }
    }
}

impl FilterWindow {
    pub fn validate(&self) -> Result<(), RadiometryError> {
        if !(self.bandwidth_nm > 0.0 && self.gate > 0.0) {
            return Err(RadiometryError::InvalidWindow(format!(
                "bandwidth {} nm, gate {} s",
                self.bandwidth_nm, self.gate
            )));
        }
        Ok(())
    }
}

/// Daytime background photons collected by the satellite receiver from the
/// sunlit Earth,
///
/// N_day = a_E r^2 IFOV^2 H_sun    (photons s^-1 nm^-1)
///
/// `r` is the receiver aperture radius and `ifov` the full-cone field of
/// view. The result is independent of the link distance: the viewed ground
/// patch grows with the same L^2 that dilutes the received radiance.
pub fn uplink_day_noise(env: &NoiseEnvironment, r: f64, ifov: f64) -> f64 {
    env.a_earth * r * r * ifov * ifov * env.h_sun
}

/// Ratio of full-moon to daytime Earth radiance,
///
/// alpha = a_M (R_M / d_EM)^2
pub fn moon_factor(env: &NoiseEnvironment) -> f64 {
    let x = env.r_moon / env.d_earth_moon;
    env.a_moon * x * x
}

/// Nighttime (full moon) counterpart of [`uplink_day_noise`]:
/// N_night = alpha N_day. Thermal surface emission is reported separately
/// by [`blackbody_surface_emission`], not folded in here.
pub fn uplink_night_noise(env: &NoiseEnvironment, r: f64, ifov: f64) -> f64 {
    moon_factor(env) * uplink_day_noise(env, r, ifov)
}

/// Photon emission of a thermal surface in both bandwidth conventions.
#[derive(Debug, Clone, Copy)]
pub struct BlackbodyEmission {
    /// photons s^-1 m^-2 per metre of bandwidth.
    pub per_meter: f64,
    /// photons s^-1 m^-2 per nanometre of bandwidth.
    pub per_nm: f64,
}

/// Spectral photon exitance of a black body at temperature `t`,
///
/// S_bb = (2c / lambda^4) / (exp(hc / lambda k T) - 1)
///
/// The natural unit of the formula is per metre of bandwidth; both
/// conventions are returned because quoted figures in the literature mix
/// them. Underflows to 0 for large hc/(lambda k T) instead of overflowing.
pub fn blackbody_surface_emission(t: f64, wavelength: f64) -> BlackbodyEmission {
    let c = crate::constants::SPEED_OF_LIGHT;
    let x = photon_energy(wavelength) / (crate::constants::BOLTZMANN * t);
    // exp(x) saturates to +inf for x > ~709; the division then underflows
    // to the correct limit 0.
    let per_meter = (2.0 * c / wavelength.powi(4)) / x.exp_m1();
    BlackbodyEmission {
        per_meter,
        per_nm: per_meter * 1e-9,
    }
}

/// Solid angle of a full-cone field of view, Omega = pi (IFOV/2)^2.
pub fn fov_solid_angle(ifov: f64) -> f64 {
    std::f64::consts::PI * (ifov / 2.0) * (ifov / 2.0)
}

/// Sky background collected by the ground telescope.
#[derive(Debug, Clone, Copy)]
pub struct DownlinkNoise {
    /// Collected optical power, W.
    pub power: f64,
    /// Equivalent photon rate at the signal wavelength, photons s^-1.
    pub photon_rate: f64,
}

/// P_b = H_b Omega_fov pi r^2 delta_nu_um, photon rate P_b / (hc/lambda).
///
/// `delta_nu_um` is the filter bandwidth in micrometres, matching the
/// radiance unit W m^-2 sr^-1 um^-1 of the environment.
pub fn downlink_noise_power(
    env: &NoiseEnvironment,
    omega_fov: f64,
    r: f64,
    delta_nu_um: f64,
    wavelength: f64,
) -> DownlinkNoise {
    let power = env.sky_radiance * omega_fov * std::f64::consts::PI * r * r * delta_nu_um;
    DownlinkNoise {
        power,
        photon_rate: power / photon_energy(wavelength),
    }
}

/// Photon-counting signal-to-noise budget for one detector gate.
#[derive(Debug, Clone, Copy)]
pub struct SnrReport {
    /// Expected signal detections per gate.
    pub signal: f64,
    /// Expected noise detections per gate, background plus dark.
    pub noise: f64,
    pub snr: f64,
    pub snr_db: f64,
    /// Set when noise is exactly zero and `snr` is the +infinity sentinel.
    pub noise_free: bool,
}

/// Per-gate SNR of a gated photon counter.
///
/// `signal_rate` and `noise_rate` are photon rates at the detector after
/// all optical filtering; `dark_rate` adds detector dark counts into the
/// noise budget.
pub fn snr(
    signal_rate: f64,
    noise_rate: f64,
    dark_rate: f64,
    window: &FilterWindow,
) -> Result<SnrReport, RadiometryError> {
    window.validate()?;
    for v in [signal_rate, noise_rate, dark_rate] {
        if v < 0.0 || v.is_nan() {
            return Err(RadiometryError::NegativeRate(v));
        }
    }
    let signal = signal_rate * window.gate;
    let noise = (noise_rate + dark_rate) * window.gate;
    let (snr, noise_free) = if noise == 0.0 {
        (f64::INFINITY, true)
    } else {
        (signal / noise, false)
    };
    Ok(SnrReport {
        signal,
        noise,
        snr,
        snr_db: 10.0 * snr.log10(),
        noise_free,
    })
}
