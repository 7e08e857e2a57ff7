//! Reflection coefficients of the tracking mirrors.
//!
//! A metallic mirror is described by a table of complex refractive indices
//! n(lambda); reflection amplitudes come from the Fresnel formulas at the
//! instantaneous incidence angle. The ideal mirror (r_s = r_p = -1) is the
//! limit used by symmetry tests.

use super::PolarizationError;
use num_complex::Complex64;

/// Complex refractive index samples on a strictly increasing wavelength
/// grid, linearly interpolated.
#[derive(Debug, Clone)]
pub struct RefractiveIndexTable {
    wavelengths_nm: Vec<f64>,
    indices: Vec<Complex64>,
}

impl RefractiveIndexTable {
    pub fn new(
        wavelengths_nm: Vec<f64>,
        indices: Vec<Complex64>,
    ) -> Result<Self, PolarizationError> {
        if wavelengths_nm.len() != indices.len() || wavelengths_nm.len() < 2 {
            return Err(PolarizationError::InvalidMirror(format!(
                "need at least two matched samples, got {} wavelengths and {} indices",
                wavelengths_nm.len(),
                indices.len()
            )));
        }
        for pair in wavelengths_nm.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(PolarizationError::InvalidMirror(format!(
                    "wavelengths must increase strictly, got {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        if indices
            .iter()
            .any(|n| !n.re.is_finite() || !n.im.is_finite())
        {
            return Err(PolarizationError::InvalidMirror(
                "non-finite index sample".into(),
            ));
        }
        Ok(RefractiveIndexTable {
            wavelengths_nm,
            indices,
        })
    }

    /// Parses a whitespace- or comma-separated table with rows
    /// `wavelength_nm  n_real  n_imag`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, PolarizationError> {
        let mut wavelengths = Vec::new();
        let mut indices = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 3 {
                return Err(PolarizationError::InvalidMirror(format!(
                    "line {}: expected 3 fields (wavelength_nm n_real n_imag), got {}",
                    idx + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64, PolarizationError> {
                s.parse().map_err(|_| {
                    PolarizationError::InvalidMirror(format!(
                        "line {}: cannot parse number {s:?}",
                        idx + 1
                    ))
                })
            };
            wavelengths.push(parse(fields[0])?);
            indices.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
        }
        RefractiveIndexTable::new(wavelengths, indices)
    }

    pub fn wavelength_range_nm(&self) -> (f64, f64) {
        (
            self.wavelengths_nm[0],
            *self.wavelengths_nm.last().unwrap(),
        )
    }

    /// Index at `wavelength` metres; errors outside the tabulated range.
    /// The metre-to-nanometre round trip is snapped to the range edges so
    /// a nominal boundary wavelength survives unit conversion.
    pub fn index_at(&self, wavelength: f64) -> Result<Complex64, PolarizationError> {
        let mut nm = wavelength * 1e9;
        let (lo, hi) = self.wavelength_range_nm();
        if (nm - lo).abs() < 1e-6 {
            nm = lo;
        } else if (nm - hi).abs() < 1e-6 {
            nm = hi;
        }
        if !(nm >= lo && nm <= hi) {
            return Err(PolarizationError::WavelengthOutOfRange { nm, lo, hi });
        }
        let i = match self
            .wavelengths_nm
            .binary_search_by(|w| w.partial_cmp(&nm).unwrap())
        {
            Ok(exact) => return Ok(self.indices[exact]),
            Err(upper) => upper,
        };
        let (w0, w1) = (self.wavelengths_nm[i - 1], self.wavelengths_nm[i]);
        let f = (nm - w0) / (w1 - w0);
        Ok(self.indices[i - 1] * (1.0 - f) + self.indices[i] * f)
    }
}

/// Built-in aluminum-like mirror covering 600-1000 nm. Both the real and
/// imaginary parts grow monotonically with wavelength, which the
/// probe-compensation error analysis relies on.
pub fn aluminum_like() -> RefractiveIndexTable {
    let wavelengths: Vec<f64> = (0..9).map(|i| 600.0 + 50.0 * i as f64).collect();
    let n = [1.20, 1.40, 1.60, 1.80, 2.00, 2.18, 2.34, 2.48, 2.60];
    let k = [7.26, 7.55, 7.84, 8.13, 8.42, 8.71, 9.00, 9.29, 9.58];
    let indices = n
        .iter()
        .zip(k.iter())
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    RefractiveIndexTable::new(wavelengths, indices).unwrap()
}

/// Amplitude reflection coefficients (r_s, r_p) of an interface with
/// complex index `n` at incidence angle `phi` (radians from the normal):
///
/// w = sqrt(n^2 - sin^2 phi)
/// r_s = (cos phi - w) / (cos phi + w)
/// r_p = (n^2 cos phi - w) / (n^2 cos phi + w)
pub fn fresnel_reflection(n: Complex64, phi: f64) -> (Complex64, Complex64) {
    let cos_phi = Complex64::from(phi.cos());
    let n2 = n * n;
    let w = (n2 - phi.sin() * phi.sin()).sqrt();
    let r_s = (cos_phi - w) / (cos_phi + w);
    let r_p = (n2 * cos_phi - w) / (n2 * cos_phi + w);
    (r_s, r_p)
}

/// Mirror used by the pass channel.
#[derive(Debug, Clone)]
pub enum MirrorModel {
    /// Lossless sign-flipping reference mirror, r_s = r_p = -1 at every
    /// angle and wavelength.
    Ideal,
    /// Metallic coating with the given index table.
    Metallic(RefractiveIndexTable),
}

impl MirrorModel {
    /// (r_s, r_p) at the given incidence angle and wavelength (m).
    pub fn reflection(
        &self,
        phi: f64,
        wavelength: f64,
    ) -> Result<(Complex64, Complex64), PolarizationError> {
        match self {
            MirrorModel::Ideal => {
                let minus_one = Complex64::new(-1.0, 0.0);
                Ok((minus_one, minus_one))
            }
            MirrorModel::Metallic(table) => {
                Ok(fresnel_reflection(table.index_at(wavelength)?, phi))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let t = aluminum_like();
        let at_700 = t.index_at(700e-9).unwrap();
        assert_relative_eq!(at_700.re, 1.60, max_relative = 1e-12);
        assert_relative_eq!(at_700.im, 7.84, max_relative = 1e-12);
        let mid = t.index_at(625e-9).unwrap();
        assert_relative_eq!(mid.re, 1.30, max_relative = 1e-12);
        assert_relative_eq!(mid.im, 7.405, max_relative = 1e-12);
    }

    #[test]
    fn out_of_range_wavelength_is_an_error() {
        let t = aluminum_like();
        assert!(t.index_at(550e-9).is_err());
        assert!(t.index_at(1100e-9).is_err());
        assert!(t.index_at(600e-9).is_ok());
        assert!(t.index_at(1000e-9).is_ok());
    }

    #[test]
    fn table_requires_increasing_wavelengths() {
        let bad = RefractiveIndexTable::new(
            vec![800.0, 700.0],
            vec![Complex64::new(1.0, 7.0), Complex64::new(1.1, 7.1)],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn parses_text_table_with_comments() {
        let t = RefractiveIndexTable::parse(
            "# wavelength_nm n k\n600 1.2 7.26\n800, 2.0, 8.42\n\n1000 2.6 9.58 # end\n",
        )
        .unwrap();
        let n = t.index_at(800e-9).unwrap();
        assert_relative_eq!(n.re, 2.0, max_relative = 1e-12);
        assert_relative_eq!(n.im, 8.42, max_relative = 1e-12);
        assert!(RefractiveIndexTable::parse("600 1.2\n").is_err());
    }

    #[test]
    fn normal_incidence_reflection_is_symmetric() {
        // At phi = 0 there is no s/p distinction: r_p = -r_s in this sign
        // convention (the p basis vector flips through the reflection).
        let n = Complex64::new(2.0, 8.0);
        let (r_s, r_p) = fresnel_reflection(n, 0.0);
        assert_relative_eq!((r_s + r_p).norm(), 0.0, epsilon = 1e-12);
        assert!(r_s.norm() > 0.9 && r_s.norm() < 1.0);
    }

    #[test]
    fn metallic_reflectance_stays_physical() {
        let m = MirrorModel::Metallic(aluminum_like());
        for phi_deg in [0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 89.0] {
            let (r_s, r_p) = m.reflection(phi_deg * std::f64::consts::PI / 180.0, 800e-9).unwrap();
            assert!(r_s.norm() <= 1.0 + 1e-12, "phi = {phi_deg}");
            assert!(r_p.norm() <= 1.0 + 1e-12, "phi = {phi_deg}");
            assert!(r_s.norm() > 0.8 && r_p.norm() > 0.8, "phi = {phi_deg}");
        }
    }

    #[test]
    fn s_reflectance_grows_with_incidence() {
        let n = aluminum_like().index_at(800e-9).unwrap();
        let mut last = 0.0;
        for phi_deg in [0.0, 20.0, 40.0, 60.0, 80.0] {
            let (r_s, _) = fresnel_reflection(n, phi_deg * std::f64::consts::PI / 180.0);
            assert!(r_s.norm() >= last, "phi = {phi_deg}");
            last = r_s.norm();
        }
    }

    #[test]
    fn ideal_mirror_is_angle_independent() {
        let m = MirrorModel::Ideal;
        let (r_s, r_p) = m.reflection(0.7, 800e-9).unwrap();
        assert_eq!(r_s, Complex64::new(-1.0, 0.0));
        assert_eq!(r_p, Complex64::new(-1.0, 0.0));
    }
}
