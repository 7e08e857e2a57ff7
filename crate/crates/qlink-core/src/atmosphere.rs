//! Turbulence-limited propagation of a Gaussian beam on a vertical
//! ground-satellite path.
//!
//! The model chain is: a Hufnagel-Valley style structure-constant profile
//! Cn^2(h), the path-weighted Fried parameter r0, short-term and long-term
//! beam widths at the receiver plane, and the aperture collection
//! efficiency of the link.

use crate::numeric::{composite_simpson, QuadratureConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AtmosphereError {
    #[error("altitude must be non-negative, got {0} m")]
    NegativeAltitude(f64),
    #[error("invalid link geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid efficiency parameter: {0}")]
    InvalidEfficiency(String),
}

// ---- Turbulence profile ----

/// Altitude profile of the refractive-index structure constant,
///
/// Cn^2(h) = 0.00594 (v/27)^2 (h 1e-5)^10 exp(-h/1000)
///           + 2.7e-16 exp(-h/1500) + A exp(-h/100)
///
/// with h in metres above sea level and Cn^2 in m^(-2/3).
#[derive(Debug, Clone, Copy)]
pub struct TurbulenceProfile {
    /// Ground-layer coefficient A, m^(-2/3).
    pub a_coefficient: f64,
    /// High-altitude wind speed v, m/s.
    pub wind_speed: f64,
}

impl Default for TurbulenceProfile {
    fn default() -> Self {
        TurbulenceProfile {
            a_coefficient: 1.7e-14,
            wind_speed: 21.0,
        }
    }
}

impl TurbulenceProfile {
    /// Structure constant at altitude `h` metres. Fails on negative altitude.
    pub fn cn2_at(&self, h: f64) -> Result<f64, AtmosphereError> {
        if h < 0.0 || h.is_nan() {
            return Err(AtmosphereError::NegativeAltitude(h));
        }
        Ok(self.cn2_unchecked(h))
    }

    fn cn2_unchecked(&self, h: f64) -> f64 {
        let wind = 0.00594 * (self.wind_speed / 27.0).powi(2);
        wind * (h * 1e-5).powi(10) * (-h / 1000.0).exp()
            + 2.7e-16 * (-h / 1500.0).exp()
            + self.a_coefficient * (-h / 100.0).exp()
    }

    /// Altitude above which Cn^2 stays below `cutoff`.
    ///
    /// The profile is strictly decreasing beyond the 10 km peak of the wind
    /// term, so a forward scan from there bounds the turbulent layer. Returns
    /// 0 when the whole profile is already below the cutoff.
    pub fn turbulent_span(&self, cutoff: f64) -> f64 {
        const PEAK: f64 = 10_000.0;
        const STEP: f64 = 1_000.0;
        const CAP: f64 = 1_000_000.0;
        if self.cn2_unchecked(0.0) < cutoff && self.cn2_unchecked(PEAK) < cutoff {
            return 0.0;
        }
        let mut h = PEAK;
        while h < CAP {
            if self.cn2_unchecked(h) < cutoff {
                return h;
            }
            h += STEP;
        }
        CAP
    }
}

// ---- Link geometry ----

/// Direction of propagation on the vertical path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Ground transmitter, satellite receiver. Turbulence sits at the start
    /// of the path.
    Uplink,
    /// Satellite transmitter, ground receiver. Turbulence sits at the end.
    Downlink,
}

/// Geometry of a single zenith link.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry {
    /// Wavelength, m.
    pub wavelength: f64,
    /// Transmitting telescope aperture diameter, m. The beam waist is half
    /// of it.
    pub tx_aperture: f64,
    /// Path length transmitter to receiver, m.
    pub path_length: f64,
    pub direction: Direction,
    /// Altitude of the ground terminal above sea level, m.
    pub ground_altitude: f64,
    /// Radius of the receiving aperture, m.
    pub receiver_radius: f64,
    /// Full-cone instantaneous field of view of the receiver, rad.
    pub ifov: f64,
}

impl LinkGeometry {
    pub fn new(
        wavelength: f64,
        tx_aperture: f64,
        path_length: f64,
        direction: Direction,
    ) -> Result<Self, AtmosphereError> {
        let g = LinkGeometry {
            wavelength,
            tx_aperture,
            path_length,
            direction,
            ground_altitude: 0.0,
            receiver_radius: 0.5,
            ifov: 1e-5,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_ground_altitude(mut self, altitude: f64) -> Result<Self, AtmosphereError> {
        self.ground_altitude = altitude;
        self.validate()?;
        Ok(self)
    }

    pub fn with_receiver_radius(mut self, radius: f64) -> Result<Self, AtmosphereError> {
        self.receiver_radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn with_ifov(mut self, ifov: f64) -> Result<Self, AtmosphereError> {
        self.ifov = ifov;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), AtmosphereError> {
        let check = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(AtmosphereError::InvalidGeometry(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        check(self.wavelength, "wavelength")?;
        check(self.tx_aperture, "tx_aperture")?;
        check(self.path_length, "path_length")?;
        check(self.receiver_radius, "receiver_radius")?;
        check(self.ifov, "ifov")?;
        if self.ground_altitude < 0.0 {
            return Err(AtmosphereError::InvalidGeometry(format!(
                "ground_altitude must be non-negative, got {}",
                self.ground_altitude
            )));
        }
        Ok(())
    }

    /// Wavenumber k = 2 pi / lambda.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Beam waist w0 at the transmitter, half the aperture diameter.
    pub fn beam_waist(&self) -> f64 {
        self.tx_aperture / 2.0
    }

    /// Rayleigh parameter Z0 = k w0^2 / 2.
    pub fn rayleigh_length(&self) -> f64 {
        let w0 = self.beam_waist();
        self.wavenumber() * w0 * w0 / 2.0
    }

    /// Altitude of the point at path coordinate `z` from the transmitter.
    pub fn altitude_at(&self, z: f64) -> f64 {
        match self.direction {
            Direction::Uplink => self.ground_altitude + z,
            Direction::Downlink => self.ground_altitude + (self.path_length - z),
        }
    }
}

// ---- Fried parameter ----

/// Path-weighted Fried parameter,
///
/// r0 = [ 0.42 k^2 Int_0^L Cn^2(h(z)) ((L - z)/L)^(5/3) dz ]^(-3/5)
///
/// with z measured from the transmitter. The weight keeps full strength at
/// the transmitter end, so an uplink (turbulence first) yields a much
/// smaller r0 than a downlink over the same path.
///
/// The integrand is evaluated only where the profile exceeds the configured
/// tail cutoff; a path with no turbulent section returns +infinity, the
/// vacuum sentinel.
pub fn fried_parameter(
    geometry: &LinkGeometry,
    profile: &TurbulenceProfile,
    quad: &QuadratureConfig,
) -> f64 {
    let l = geometry.path_length;
    let span = profile.turbulent_span(quad.tail_cutoff);
    // Map the turbulent altitude band back to path coordinates.
    let (a, b) = match geometry.direction {
        Direction::Uplink => (0.0, (span - geometry.ground_altitude).clamp(0.0, l)),
        Direction::Downlink => ((l - (span - geometry.ground_altitude)).clamp(0.0, l), l),
    };
    if b <= a {
        return f64::INFINITY;
    }
    let integral = composite_simpson(
        |z| {
            let w = ((l - z) / l).max(0.0).powf(5.0 / 3.0);
            profile.cn2_unchecked(geometry.altitude_at(z)) * w
        },
        a,
        b,
        quad.panels,
    );
    if integral <= 0.0 {
        return f64::INFINITY;
    }
    let k = geometry.wavenumber();
    (0.42 * k * k * integral).powf(-3.0 / 5.0)
}

// ---- Beam widths ----

/// Receiver-plane beam widths of a collimated Gaussian beam.
#[derive(Debug, Clone, Copy)]
pub struct BeamWidths {
    /// Short-term (wander-removed) 1/e^2 radius, m.
    pub w_st: f64,
    /// Long-term 1/e^2 radius, m.
    pub w_lt: f64,
    /// Beam-wander variance <beta^2>, m^2. Satisfies
    /// w_lt^2 = w_st^2 + 2 <beta^2> exactly.
    pub beta_sq: f64,
    /// Fried parameter the widths were computed for, m.
    pub r0: f64,
}

impl BeamWidths {
    /// Fraction of the long-term spread produced by wander,
    /// <beta^2> / w_st^2.
    pub fn wander_ratio(&self) -> f64 {
        self.beta_sq / (self.w_st * self.w_st)
    }
}

/// Long-term and short-term beam widths for Fried parameter `r0`:
///
/// w_LT^2 = w0^2 (1 + L^2/Z0^2) + 2 (4 L / (k r0))^2
/// w_ST^2 = w0^2 (1 + L^2/Z0^2)
///          + 2 { (4.2 L / (k r0)) [1 - 0.26 (r0/w0)^(1/3)] }^2
///
/// The short-term bracket goes negative for r0 > (1/0.26)^3 w0; its
/// turbulence term is clamped at zero there. The short-term width is further
/// capped at the long-term width so that the wander variance
/// <beta^2> = (w_LT^2 - w_ST^2)/2 is never negative.
pub fn beam_widths(geometry: &LinkGeometry, r0: f64) -> BeamWidths {
    let w0 = geometry.beam_waist();
    let l = geometry.path_length;
    let k = geometry.wavenumber();
    let z0 = geometry.rayleigh_length();
    let vacuum_sq = w0 * w0 * (1.0 + (l / z0).powi(2));

    let lt_sq = vacuum_sq + 2.0 * (4.0 * l / (k * r0)).powi(2);
    let bracket = (1.0 - 0.26 * (r0 / w0).powf(1.0 / 3.0)).max(0.0);
    let st_turb = 2.0 * (4.2 * l / (k * r0) * bracket).powi(2);
    let st_sq = (vacuum_sq + st_turb).min(lt_sq);

    BeamWidths {
        w_st: st_sq.sqrt(),
        w_lt: lt_sq.sqrt(),
        beta_sq: (lt_sq - st_sq) / 2.0,
        r0,
    }
}

// ---- Collection efficiency ----

/// Link efficiency of a circular receiver aperture centred on the beam.
#[derive(Debug, Clone, Copy)]
pub struct LinkEfficiency {
    /// Collected fraction including the fixed system efficiency eta0.
    pub eta: f64,
    /// Attenuation in dB, -10 log10(eta).
    pub attenuation_db: f64,
}

/// eta = eta0 (1 - exp(-2 R^2 / w_LT^2))
///
/// `eta0` lumps every non-geometric loss (optics, pointing, detection) into
/// one multiplier in (0, 1].
pub fn link_efficiency(
    w_lt: f64,
    receiver_radius: f64,
    eta0: f64,
) -> Result<LinkEfficiency, AtmosphereError> {
    if !(eta0 > 0.0 && eta0 <= 1.0) {
        return Err(AtmosphereError::InvalidEfficiency(format!(
            "eta0 must lie in (0, 1], got {eta0}"
        )));
    }
    if !(receiver_radius > 0.0 && receiver_radius.is_finite()) {
        return Err(AtmosphereError::InvalidEfficiency(format!(
            "receiver radius must be positive, got {receiver_radius}"
        )));
    }
    if !(w_lt > 0.0) {
        return Err(AtmosphereError::InvalidEfficiency(format!(
            "long-term width must be positive, got {w_lt}"
        )));
    }
    let eta = eta0 * (1.0 - (-2.0 * receiver_radius * receiver_radius / (w_lt * w_lt)).exp());
    Ok(LinkEfficiency {
        eta,
        attenuation_db: -10.0 * eta.log10(),
    })
}
