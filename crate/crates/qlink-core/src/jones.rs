//! Minimal 2x2 complex linear algebra for fully polarized light.
//!
//! A hand-rolled matrix type keeps the polarization chain free of a general
//! linear-algebra dependency; every operation the channel model needs has a
//! closed form in two dimensions.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum JonesError {
    #[error("matrix is singular (|det| = {0:.3e})")]
    Singular(f64),
    #[error("vector is not normalized (A^2 + B^2 = {0})")]
    NotNormalized(f64),
}

/// 2x2 complex operator acting on Jones vectors. Row-major storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jones {
    pub m: [[Complex64; 2]; 2],
}

impl Jones {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Jones { m: [[a, b], [c, d]] }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Jones::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Jones::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// Real rotation of the polarization plane by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Jones::from_real(c, -s, s, c)
    }

    /// Diagonal operator diag(a, b).
    pub fn diagonal(a: Complex64, b: Complex64) -> Self {
        Jones::new(a, Complex64::ZERO, Complex64::ZERO, b)
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Jones::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Jones::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn sub(&self, other: &Jones) -> Self {
        Jones::new(
            self.m[0][0] - other.m[0][0],
            self.m[0][1] - other.m[0][1],
            self.m[1][0] - other.m[1][0],
            self.m[1][1] - other.m[1][1],
        )
    }

    pub fn inverse(&self) -> Result<Self, JonesError> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return Err(JonesError::Singular(d.norm()));
        }
        Ok(Jones::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        ))
    }

    pub fn norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_element(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// Singular values (largest, smallest).
    pub fn singular_values(&self) -> (f64, f64) {
        let h = self.adjoint().mul(self);
        // Hermitian 2x2: eigenvalues from trace and determinant.
        let tr = h.trace().re;
        let det = h.det().re.max(0.0);
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        (
            ((tr + disc) / 2.0).max(0.0).sqrt(),
            ((tr - disc) / 2.0).max(0.0).sqrt(),
        )
    }

    pub fn condition_number(&self) -> f64 {
        let (hi, lo) = self.singular_values();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn mul(&self, rhs: &Jones) -> Jones {
        let mut out = [[Complex64::ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        Jones { m: out }
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        JonesVector {
            h: self.m[0][0] * v.h + self.m[0][1] * v.v,
            v: self.m[1][0] * v.h + self.m[1][1] * v.v,
        }
    }

    /// Unitary factor of the polar decomposition, with the global phase
    /// fixed so the largest-modulus element is real and positive.
    ///
    /// For M = U P (P positive semi-definite), returns U. Strips common
    /// attenuation and phase while preserving the polarization action, so
    /// a perfectly compensated channel maps exactly to the identity.
    pub fn polar_unitary(&self) -> Result<Jones, JonesError> {
        let h = self.adjoint().mul(self);
        let det_sqrt = {
            let d = h.det().re.max(0.0);
            d.sqrt()
        };
        if det_sqrt < 1e-300 {
            return Err(JonesError::Singular(det_sqrt));
        }
        // sqrt of a PSD 2x2: (H + sqrt(det H) I) / sqrt(tr H + 2 sqrt(det H)).
        let t = (h.trace().re + 2.0 * det_sqrt).sqrt();
        let sqrt_h = Jones::new(
            (h.m[0][0] + det_sqrt) / t,
            h.m[0][1] / t,
            h.m[1][0] / t,
            (h.m[1][1] + det_sqrt) / t,
        );
        let inv_sqrt_h = sqrt_h.inverse()?;
        let u = self.mul(&inv_sqrt_h);

        let mut largest = Complex64::ZERO;
        let mut largest_norm = -1.0;
        for e in u.m.iter().flatten() {
            if e.norm() > largest_norm {
                largest_norm = e.norm();
                largest = *e;
            }
        }
        let phase = largest / largest.norm();
        Ok(u.scaled(phase.conj()))
    }
}

impl std::ops::Mul for Jones {
    type Output = Jones;
    fn mul(self, rhs: Jones) -> Jones {
        Jones::mul(&self, &rhs)
    }
}

/// Fully polarized field amplitude (E_H, E_V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl JonesVector {
    /// State (A, B e^{i phi}); A and B must satisfy A^2 + B^2 = 1.
    pub fn new(a: f64, b: f64, phi: f64) -> Result<Self, JonesError> {
        let n = a * a + b * b;
        if (n - 1.0).abs() > 1e-9 {
            return Err(JonesError::NotNormalized(n));
        }
        Ok(JonesVector {
            h: a.into(),
            v: Complex64::from_polar(b, phi),
        })
    }

    pub fn horizontal() -> Self {
        JonesVector::new(1.0, 0.0, 0.0).unwrap()
    }

    pub fn vertical() -> Self {
        JonesVector::new(0.0, 1.0, 0.0).unwrap()
    }

    pub fn diagonal() -> Self {
        JonesVector::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0)
            .unwrap()
    }

    pub fn antidiagonal() -> Self {
        JonesVector::new(
            std::f64::consts::FRAC_1_SQRT_2,
            -std::f64::consts::FRAC_1_SQRT_2,
            0.0,
        )
        .unwrap()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn normalized(&self) -> JonesVector {
        let n = self.norm_sqr().sqrt();
        JonesVector {
            h: self.h / n,
            v: self.v / n,
        }
    }

    /// Overlap <self|other>.
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    /// Stokes coordinates (S1, S2, S3) of the normalized state.
    ///
    /// S1 = |E_H|^2 - |E_V|^2, S2 = 2 Re(E_H E_V*), S3 = -2 Im(E_H E_V*);
    /// unit norm input gives a point on the unit sphere.
    pub fn stokes(&self) -> [f64; 3] {
        let cross = self.h * self.v.conj();
        [
            self.h.norm_sqr() - self.v.norm_sqr(),
            2.0 * cross.re,
            -2.0 * cross.im,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotation_is_unitary_with_unit_determinant() {
        let r = Jones::rotation(0.7);
        let should_be_identity = r.adjoint().mul(&r);
        assert!(should_be_identity.sub(&Jones::identity()).norm() < 1e-14);
        assert_relative_eq!(r.det().re, 1.0, max_relative = 1e-14);
        assert!(r.det().im.abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trips() {
        let a = Jones::new(c(1.0, 0.5), c(-0.3, 0.1), c(0.2, -0.7), c(0.9, 0.0));
        let prod = a.mul(&a.inverse().unwrap());
        assert!(prod.sub(&Jones::identity()).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let s = Jones::from_real(1.0, 2.0, 2.0, 4.0);
        assert!(matches!(s.inverse(), Err(JonesError::Singular(_))));
    }

    #[test]
    fn condition_number_of_rotation_is_one() {
        assert_relative_eq!(
            Jones::rotation(1.1).condition_number(),
            1.0,
            max_relative = 1e-12
        );
        let d = Jones::diagonal(c(3.0, 0.0), c(1.0, 0.0));
        assert_relative_eq!(d.condition_number(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn polar_unitary_strips_scalar_attenuation_and_phase() {
        let u = Jones::rotation(0.4).mul(&Jones::diagonal(
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, -0.9),
        ));
        let scaled = u.scaled(Complex64::from_polar(0.01, 2.2));
        let recovered = scaled.polar_unitary().unwrap();
        // Same action as u up to global phase: align phases and compare.
        let aligned = recovered.scaled(u.m[0][0] / recovered.m[0][0]);
        assert!(aligned.sub(&u).norm() < 1e-12);
        let gram = recovered.adjoint().mul(&recovered);
        assert!(gram.sub(&Jones::identity()).norm() < 1e-12);
    }

    #[test]
    fn polar_unitary_largest_element_is_real_positive() {
        let m = Jones::new(c(0.2, 0.1), c(-0.9, 0.4), c(0.8, -0.5), c(0.1, 0.3));
        let u = m.polar_unitary().unwrap();
        let mut largest = Complex64::ZERO;
        for e in u.m.iter().flatten() {
            if e.norm() > largest.norm() {
                largest = *e;
            }
        }
        assert!(largest.im.abs() < 1e-12);
        assert!(largest.re > 0.0);
    }

    #[test]
    fn polar_unitary_rejects_singular_input() {
        let s = Jones::from_real(1.0, 1.0, 1.0, 1.0);
        assert!(s.polar_unitary().is_err());
    }

    #[test]
    fn stokes_of_cardinal_states() {
        let h = JonesVector::horizontal().stokes();
        assert_relative_eq!(h[0], 1.0, max_relative = 1e-14);
        assert!(h[1].abs() < 1e-14 && h[2].abs() < 1e-14);
        let d = JonesVector::diagonal().stokes();
        assert_relative_eq!(d[1], 1.0, max_relative = 1e-14);
        let circ = JonesVector::new(
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap()
        .stokes();
        assert_relative_eq!(circ[2], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn stokes_norm_is_one_for_pure_states() {
        let v = JonesVector::new(0.6, 0.8, 1.234).unwrap();
        let s = v.stokes();
        let n = s.iter().map(|x| x * x).sum::<f64>();
        assert_relative_eq!(n, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn vector_constructor_enforces_normalization() {
        assert!(JonesVector::new(1.0, 1.0, 0.0).is_err());
        assert!(JonesVector::new(0.6, 0.8, 0.5).is_ok());
    }

    #[test]
    fn rotation_moves_horizontal_toward_diagonal() {
        let out = Jones::rotation(std::f64::consts::FRAC_PI_4).apply(&JonesVector::horizontal());
        let overlap = out.inner(&JonesVector::diagonal()).norm();
        assert_relative_eq!(overlap, 1.0, max_relative = 1e-12);
    }
}
