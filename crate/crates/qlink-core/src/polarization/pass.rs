//! Circular-pass geometry and the two-mirror polarization channel.
//!
//! The ground station sits at `R_E x_hat`; local zenith is `x_hat`. The
//! satellite moves on a circular orbit parameterized by the angle `psi`
//! past the point of closest approach,
//!
//! P(psi) = R_o [cos(g) cos(psi), sin(psi), sin(g) cos(psi)]
//!
//! where `g` is the minimum central angle between station and satellite,
//! chosen so the peak elevation matches the requested maximum. `psi = 0`
//! (t = 0) is the culmination instant and the pass is symmetric around it.
//!
//! The optical chain has two steering mirrors. On the satellite the beam
//! leaves the source along the velocity direction and is folded onto the
//! line of sight; on the ground the line of sight is folded onto the fixed
//! laboratory axis `y_hat`. Each fold contributes a diagonal Fresnel
//! operator in its own s/p frame plus real basis rotations between frames.

use super::mirror::MirrorModel;
use super::vec3::Vec3;
use super::PolarizationError;
use crate::constants::{EARTH_MU, EARTH_RADIUS};
use crate::jones::Jones;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One satellite pass over the station, already solved for its orbit
/// geometry and visibility window.
#[derive(Debug, Clone, Copy)]
pub struct PassGeometry {
    altitude: f64,
    orbit_radius: f64,
    /// Minimum station-satellite central angle, reached at t = 0.
    gamma_min: f64,
    /// Half-width of the visibility window in orbit angle.
    psi_max: f64,
    /// Orbital angular rate (rad/s).
    omega: f64,
    max_elevation: f64,
    min_elevation: f64,
}

/// Elevation of the satellite seen from the station when the central angle
/// between them is `gamma`, for a station/orbit radius ratio `rho`.
fn elevation_from_central_angle(gamma: f64, rho: f64) -> f64 {
    (gamma.cos() - rho).atan2(gamma.sin())
}

/// Solves f(x) = 0 by bisection assuming f(lo) >= 0 >= f(hi).
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..128 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl PassGeometry {
    /// `max_elevation` is the culmination elevation of this particular
    /// pass; `min_elevation` is the tracking mask that bounds the usable
    /// window. Radians.
    pub fn new(
        altitude: f64,
        max_elevation: f64,
        min_elevation: f64,
    ) -> Result<Self, PolarizationError> {
        if !(altitude.is_finite() && altitude > 0.0) {
            return Err(PolarizationError::Geometry(format!(
                "altitude must be positive, got {altitude}"
            )));
        }
        let quarter = std::f64::consts::FRAC_PI_2;
        if !(min_elevation >= 0.0 && min_elevation < max_elevation && max_elevation <= quarter) {
            return Err(PolarizationError::Geometry(format!(
                "need 0 <= min_elevation < max_elevation <= pi/2, got {min_elevation} and {max_elevation}"
            )));
        }
        let orbit_radius = EARTH_RADIUS + altitude;
        let rho = EARTH_RADIUS / orbit_radius;

        // elevation_from_central_angle decreases from pi/2 at gamma = 0 to
        // the horizon at gamma = acos(rho), so both solves bracket a root.
        let gamma_min = if max_elevation >= quarter - 1e-12 {
            0.0
        } else {
            bisect(
                |g| elevation_from_central_angle(g, rho) - max_elevation,
                0.0,
                rho.acos(),
            )
        };
        let psi_max = bisect(
            |psi| {
                let cos_gamma = (gamma_min.cos() * psi.cos()).clamp(-1.0, 1.0);
                elevation_from_central_angle(cos_gamma.acos(), rho) - min_elevation
            },
            0.0,
            quarter,
        );
        let omega = (EARTH_MU / orbit_radius.powi(3)).sqrt();
        Ok(PassGeometry {
            altitude,
            orbit_radius,
            gamma_min,
            psi_max,
            omega,
            max_elevation,
            min_elevation,
        })
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub fn max_elevation(&self) -> f64 {
        self.max_elevation
    }

    pub fn min_elevation(&self) -> f64 {
        self.min_elevation
    }

    pub fn angular_rate(&self) -> f64 {
        self.omega
    }

    /// Usable window (start, end) in seconds, symmetric around t = 0.
    pub fn window(&self) -> (f64, f64) {
        let half = self.psi_max / self.omega;
        (-half, half)
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.psi_max / self.omega
    }

    pub fn contains(&self, t: f64) -> bool {
        let (start, end) = self.window();
        t >= start - 1e-9 && t <= end + 1e-9
    }

    /// Uniform sample grid across the window, starting at the window edge.
    pub fn sample_times(&self, step: f64) -> Vec<f64> {
        assert!(step > 0.0 && step.is_finite(), "step must be positive");
        let (start, end) = self.window();
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    }

    pub fn elevation(&self, t: f64) -> f64 {
        let psi = self.omega * t;
        let rho = EARTH_RADIUS / self.orbit_radius;
        let cos_gamma = (self.gamma_min.cos() * psi.cos()).clamp(-1.0, 1.0);
        elevation_from_central_angle(cos_gamma.acos(), rho)
    }

    /// Station-satellite distance in metres.
    pub fn range(&self, t: f64) -> f64 {
        let (p_hat, _) = self.orbit_frame(t);
        Vec3::X
            .scaled(EARTH_RADIUS)
            .sub(p_hat.scaled(self.orbit_radius))
            .norm()
    }

    /// Unit vector from the satellite toward the station.
    pub fn line_of_sight(&self, t: f64) -> Vec3 {
        let (p_hat, _) = self.orbit_frame(t);
        let station = Vec3::X.scaled(EARTH_RADIUS);
        station
            .sub(p_hat.scaled(self.orbit_radius))
            .unit()
            .expect("station never coincides with the satellite")
    }

    /// Radial and along-track unit vectors at time `t`.
    fn orbit_frame(&self, t: f64) -> (Vec3, Vec3) {
        let psi = self.omega * t;
        let (sin_psi, cos_psi) = psi.sin_cos();
        let (sin_g, cos_g) = self.gamma_min.sin_cos();
        let p_hat = Vec3 {
            x: cos_g * cos_psi,
            y: sin_psi,
            z: sin_g * cos_psi,
        };
        let t_hat = Vec3 {
            x: -cos_g * sin_psi,
            y: cos_psi,
            z: -sin_g * sin_psi,
        };
        (p_hat, t_hat)
    }

    /// Incidence angles (satellite mirror, ground mirror) in radians.
    pub fn incidence_angles(&self, t: f64) -> Result<(f64, f64), PolarizationError> {
        let (_, t_hat) = self.orbit_frame(t);
        let los = self.line_of_sight(t);
        Ok((fold_incidence(t_hat, los)?, fold_incidence(los, Vec3::Y)?))
    }

    /// Jones matrix of the full two-mirror chain at time `t`, mapping the
    /// satellite source basis (H along cross-track, V along zenith) to the
    /// ground laboratory basis (H = z_hat, V = x_hat, beam along y_hat).
    pub fn channel_jones(
        &self,
        t: f64,
        wavelength: f64,
        mirror: &MirrorModel,
    ) -> Result<Jones, PolarizationError> {
        if !self.contains(t) {
            let (start, end) = self.window();
            return Err(PolarizationError::OutsideWindow { t, start, end });
        }
        let (p_hat, t_hat) = self.orbit_frame(t);
        let los = self.line_of_sight(t);

        // Source frame on the satellite: beam along the velocity, V along
        // the outward radial, H completing the right-handed triad.
        let e_v_src = p_hat;
        let e_h_src = p_hat.cross(t_hat);

        let sat = FoldFrame::new(t_hat, los)?;
        let ground = FoldFrame::new(los, Vec3::Y)?;

        // Laboratory frame behind the ground mirror: beam along y_hat, V
        // along local zenith x_hat, H along z_hat.
        let e_h_lab = Vec3::Z;
        let e_v_lab = Vec3::X;

        let (r_s_sat, r_p_sat) = mirror.reflection(sat.incidence, wavelength)?;
        let (r_s_gnd, r_p_gnd) = mirror.reflection(ground.incidence, wavelength)?;

        let into_sat = basis_change(e_h_src, e_v_src, sat.s_hat, sat.p_in);
        let sat_fold = Jones::diagonal(r_s_sat, r_p_sat);
        let between = basis_change(sat.s_hat, sat.p_out, ground.s_hat, ground.p_in);
        let ground_fold = Jones::diagonal(r_s_gnd, r_p_gnd);
        let into_lab = basis_change(ground.s_hat, ground.p_out, e_h_lab, e_v_lab);

        Ok(into_lab * ground_fold * between * sat_fold * into_sat)
    }
}

/// s/p frames on both sides of one mirror fold from `k_in` to `k_out`.
struct FoldFrame {
    s_hat: Vec3,
    p_in: Vec3,
    p_out: Vec3,
    incidence: f64,
}

impl FoldFrame {
    fn new(k_in: Vec3, k_out: Vec3) -> Result<Self, PolarizationError> {
        let s_hat = k_in.cross(k_out).unit().ok_or_else(|| {
            PolarizationError::Geometry(
                "mirror fold degenerates: beam directions are parallel".into(),
            )
        })?;
        Ok(FoldFrame {
            s_hat,
            p_in: s_hat.cross(k_in),
            p_out: s_hat.cross(k_out),
            incidence: fold_incidence(k_in, k_out)?,
        })
    }
}

/// Incidence angle of a mirror that folds `k_in` into `k_out`.
fn fold_incidence(k_in: Vec3, k_out: Vec3) -> Result<f64, PolarizationError> {
    let cos_sep = k_in.dot(k_out).clamp(-1.0, 1.0);
    let phi = (std::f64::consts::PI - cos_sep.acos()) / 2.0;
    if !phi.is_finite() {
        return Err(PolarizationError::Geometry(
            "non-finite mirror incidence angle".into(),
        ));
    }
    Ok(phi)
}

/// Components of the (a1, a2) frame expressed in the (b1, b2) frame. Both
/// frames must be orthonormal in the plane transverse to the beam.
fn basis_change(a1: Vec3, a2: Vec3, b1: Vec3, b2: Vec3) -> Jones {
    Jones::from_real(b1.dot(a1), b1.dot(a2), b2.dot(a1), b2.dot(a2))
}

/// Pass simulation inputs as they arrive from a scenario: one altitude,
/// a sampling step, the tracking mask, and the mirror coating.
#[derive(Debug, Clone)]
pub struct PassModel {
    pub altitude: f64,
    /// Sampling step in seconds.
    pub step: f64,
    /// Tracking mask; samples below this elevation are excluded.
    pub min_elevation: f64,
    pub mirror: MirrorModel,
    /// Only the chain with one satellite and one ground mirror is modeled.
    pub tracking_mirrors: usize,
}

impl PassModel {
    pub fn new(altitude: f64, mirror: MirrorModel) -> Self {
        PassModel {
            altitude,
            step: 1.0,
            min_elevation: 10f64.to_radians(),
            mirror,
            tracking_mirrors: 2,
        }
    }

    pub fn validate(&self) -> Result<(), PolarizationError> {
        if !(self.altitude.is_finite() && self.altitude > 0.0) {
            return Err(PolarizationError::Geometry(format!(
                "altitude must be positive, got {}",
                self.altitude
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(PolarizationError::Geometry(format!(
                "sampling step must be positive, got {}",
                self.step
            )));
        }
        if self.tracking_mirrors != 2 {
            return Err(PolarizationError::Geometry(format!(
                "only the two-mirror chain is modeled, got {} mirrors",
                self.tracking_mirrors
            )));
        }
        Ok(())
    }

    /// Overhead pass (culmination at zenith) for this altitude.
    pub fn overhead_pass(&self) -> Result<PassGeometry, PolarizationError> {
        PassGeometry::new(
            self.altitude,
            std::f64::consts::FRAC_PI_2,
            self.min_elevation,
        )
    }

    /// Ensemble of passes with culmination elevation uniform in
    /// [30 deg, 90 deg], reproducible from the seed.
    pub fn draw_ensemble(
        &self,
        count: usize,
        seed: u64,
    ) -> Result<Vec<PassGeometry>, PolarizationError> {
        self.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let lo = 30f64.to_radians();
        let hi = 90f64.to_radians();
        (0..count)
            .map(|_| {
                let peak = rng.random_range(lo..=hi);
                PassGeometry::new(self.altitude, peak, self.min_elevation)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::mirror::aluminum_like;
    use approx::assert_relative_eq;

    fn overhead(altitude: f64) -> PassGeometry {
        PassGeometry::new(altitude, std::f64::consts::FRAC_PI_2, 10f64.to_radians()).unwrap()
    }

    #[test]
    fn culmination_matches_requested_elevation() {
        for peak_deg in [30.0, 45.0, 60.0, 89.0] {
            let pass =
                PassGeometry::new(500e3, (peak_deg as f64).to_radians(), 10f64.to_radians())
                    .unwrap();
            assert_relative_eq!(
                pass.elevation(0.0).to_degrees(),
                peak_deg,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn window_edges_sit_on_the_mask() {
        let pass = PassGeometry::new(500e3, 70f64.to_radians(), 10f64.to_radians()).unwrap();
        let (start, end) = pass.window();
        assert_relative_eq!(start, -end, epsilon = 1e-9);
        assert_relative_eq!(pass.elevation(end).to_degrees(), 10.0, epsilon = 1e-6);
        assert!(pass.elevation(0.5 * end) > pass.elevation(end));
    }

    #[test]
    fn overhead_pass_duration_is_minutes_scale() {
        let pass = overhead(500e3);
        assert!(pass.duration() > 120.0 && pass.duration() < 900.0);
        let times = pass.sample_times(1.0);
        assert!(times.len() as f64 >= pass.duration().floor());
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn both_mirrors_fold_at_45_degrees_at_zenith() {
        let pass = overhead(500e3);
        let (phi_s, phi_g) = pass.incidence_angles(0.0).unwrap();
        assert_relative_eq!(phi_s.to_degrees(), 45.0, epsilon = 1e-9);
        assert_relative_eq!(phi_g.to_degrees(), 45.0, epsilon = 1e-9);
    }

    #[test]
    fn ideal_mirror_channel_is_identity_at_zenith() {
        let pass = overhead(500e3);
        let c = pass.channel_jones(0.0, 800e-9, &MirrorModel::Ideal).unwrap();
        assert!(c.sub(&Jones::identity()).norm() < 1e-12);
    }

    #[test]
    fn metallic_channel_at_zenith_is_squared_fresnel_diagonal() {
        let mirror = MirrorModel::Metallic(aluminum_like());
        let pass = overhead(500e3);
        let c = pass.channel_jones(0.0, 800e-9, &mirror).unwrap();
        let (r_s, r_p) = mirror
            .reflection(std::f64::consts::FRAC_PI_4, 800e-9)
            .unwrap();
        let expected = Jones::diagonal(r_s * r_s, r_p * r_p);
        assert!(c.sub(&expected).norm() < 1e-12);
        assert!(c.m[0][1].norm() < 1e-12 && c.m[1][0].norm() < 1e-12);
    }

    #[test]
    fn ideal_mirror_channel_stays_unitary_up_to_sign() {
        let pass = PassGeometry::new(500e3, 50f64.to_radians(), 10f64.to_radians()).unwrap();
        for t in pass.sample_times(10.0) {
            let c = pass.channel_jones(t, 800e-9, &MirrorModel::Ideal).unwrap();
            let gram = c.adjoint().mul(&c);
            assert!(
                gram.sub(&Jones::identity()).norm() < 1e-9,
                "t = {t}: chain of ideal folds must preserve the norm"
            );
        }
    }

    #[test]
    fn channel_is_well_conditioned_across_the_ensemble() {
        let model = PassModel::new(500e3, MirrorModel::Metallic(aluminum_like()));
        for pass in model.draw_ensemble(8, 11).unwrap() {
            for t in pass.sample_times(5.0) {
                let c = pass.channel_jones(t, 800e-9, &model.mirror).unwrap();
                assert!(c.det().norm() > 0.0, "t = {t}");
                assert!(c.condition_number() < 1e3, "t = {t}");
            }
        }
    }

    #[test]
    fn channel_moves_slowly_between_one_second_samples() {
        let mirror = MirrorModel::Metallic(aluminum_like());
        let pass = overhead(500e3);
        let times = pass.sample_times(1.0);
        let mut max_step = 0.0f64;
        for w in times.windows(2) {
            let a = pass.channel_jones(w[0], 800e-9, &mirror).unwrap();
            let b = pass.channel_jones(w[1], 800e-9, &mirror).unwrap();
            let diff = b.sub(&a);
            let elem = diff
                .m
                .iter()
                .flatten()
                .map(|e| e.norm())
                .fold(0.0, f64::max);
            max_step = max_step.max(elem);
        }
        assert!(max_step < 0.05, "largest per-second change {max_step}");
    }

    #[test]
    fn times_outside_the_window_are_rejected() {
        let pass = overhead(500e3);
        let (_, end) = pass.window();
        let err = pass.channel_jones(end + 1.0, 800e-9, &MirrorModel::Ideal);
        assert!(matches!(
            err,
            Err(PolarizationError::OutsideWindow { .. })
        ));
    }

    #[test]
    fn ensemble_is_reproducible_and_spans_the_elevation_band() {
        let model = PassModel::new(500e3, MirrorModel::Ideal);
        let a = model.draw_ensemble(64, 7).unwrap();
        let b = model.draw_ensemble(64, 7).unwrap();
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.max_elevation() == y.max_elevation()));
        let degs: Vec<f64> = a.iter().map(|p| p.max_elevation().to_degrees()).collect();
        assert!(degs.iter().all(|&d| (30.0..=90.0).contains(&d)));
        assert!(degs.iter().any(|&d| d < 50.0) && degs.iter().any(|&d| d > 70.0));
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut model = PassModel::new(500e3, MirrorModel::Ideal);
        model.tracking_mirrors = 3;
        assert!(model.validate().is_err());
        assert!(PassGeometry::new(-1.0, 1.0, 0.1).is_err());
        assert!(PassGeometry::new(500e3, 0.05, 0.2).is_err());
    }
}
