//! Physical constants shared across the crate (SI units).

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mean Earth radius, m.
pub const EARTH_RADIUS: f64 = 6.371e6;

/// Earth gravitational parameter GM, m^3/s^2.
pub const EARTH_MU: f64 = 3.986_004_418e14;

/// Photon energy h c / lambda in joules, lambda in metres.
pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_energy_at_800nm() {
        let e = photon_energy(800e-9);
        assert!((e - 2.483e-19).abs() / 2.483e-19 < 1e-3);
    }
}
