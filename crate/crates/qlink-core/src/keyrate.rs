//! Secret-key fractions for polarization-encoded weak-pulse BB84, with and
//! without decoy states, and coincidence budgets for entanglement
//! distribution.
//!
//! Everything here is asymptotic (infinite-key) theory: rates are secret
//! bits per source pulse, to be multiplied by the repetition rate. The
//! channel enters only through the collection efficiency eta and the
//! background probability per detection gate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KeyrateError {
    #[error("binary entropy argument {0} outside [0, 1]")]
    EntropyDomain(f64),
    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("decoy bound undefined: {0}")]
    UndefinedBound(String),
}

/// Source, detector and post-processing parameters shared by the protocols.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolParams {
    /// Mean photon number of the signal pulses.
    pub mu: f64,
    /// Mean photon number of the bright decoy pulses.
    pub mu_prime: f64,
    /// Error-correction inefficiency f(e) >= 1.
    pub error_correction: f64,
    /// Optical misalignment error floor.
    pub e_opt: f64,
    /// Source repetition rate, Hz.
    pub rep_rate: f64,
    /// Entangled-pair production rate, pairs/s.
    pub pair_rate: f64,
    /// Detector dark count rate, counts/s.
    pub dark_rate: f64,
    /// Detection efficiency of a local (same-site) arm.
    pub local_efficiency: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            mu: 0.27,
            mu_prime: 0.4,
            error_correction: 1.22,
            e_opt: 0.01,
            rep_rate: 1e7,
            pair_rate: 1e6,
            dark_rate: 200.0,
            local_efficiency: 0.5,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), KeyrateError> {
        if !(self.mu > 0.0 && self.mu < self.mu_prime) {
            return Err(KeyrateError::InvalidParams(format!(
                "need 0 < mu < mu_prime, got mu = {}, mu_prime = {}",
                self.mu, self.mu_prime
            )));
        }
        if self.error_correction < 1.0 {
            return Err(KeyrateError::InvalidParams(format!(
                "error_correction must be >= 1, got {}",
                self.error_correction
            )));
        }
        if !(0.0..=0.5).contains(&self.e_opt) {
            return Err(KeyrateError::InvalidParams(format!(
                "e_opt must lie in [0, 0.5], got {}",
                self.e_opt
            )));
        }
        for (v, name) in [
            (self.rep_rate, "rep_rate"),
            (self.pair_rate, "pair_rate"),
            (self.dark_rate, "dark_rate"),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(KeyrateError::InvalidParams(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        if !(0.0 < self.local_efficiency && self.local_efficiency <= 1.0) {
            return Err(KeyrateError::InvalidParams(format!(
                "local_efficiency must lie in (0, 1], got {}",
                self.local_efficiency
            )));
        }
        Ok(())
    }
}

/// H2(x) = -x log2 x - (1-x) log2(1-x), continuous at the endpoints.
pub fn binary_entropy(x: f64) -> Result<f64, KeyrateError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(KeyrateError::EntropyDomain(x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Detection statistics of one (eta, background) configuration.
#[derive(Debug, Clone, Copy)]
pub struct ChannelOperatingPoint {
    /// Link efficiency the point was computed for.
    pub eta: f64,
    /// Background + dark probability per gate.
    pub p_noise: f64,
    /// Probability that a signal pulse produces a detection.
    pub p_exp: f64,
    /// Total QBER of the sifted key.
    pub qber: f64,
    /// Counting rates per pulse for the signal, decoy and vacuum
    /// intensities.
    pub s_mu: f64,
    pub s_mu_prime: f64,
    pub s_vacuum: f64,
    /// Set when p_exp underflowed to zero; no key can be extracted.
    pub zero_rate: bool,
}

/// Poissonian click model: p_exp = 1 - e^(-mu eta) + p_noise. Half of the
/// background clicks land in the wrong detector, the optical floor e_opt
/// applies to genuine signal clicks.
pub fn operating_point(
    eta: f64,
    noise_per_gate: f64,
    params: &ProtocolParams,
) -> Result<ChannelOperatingPoint, KeyrateError> {
    params.validate()?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(KeyrateError::InvalidChannel(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    if !(0.0..1.0).contains(&noise_per_gate) {
        return Err(KeyrateError::InvalidChannel(format!(
            "noise per gate must lie in [0, 1), got {noise_per_gate}"
        )));
    }
    let click = |x: f64| -> f64 { -(-x * eta).exp_m1() };
    let signal = click(params.mu);
    let p_exp = signal + noise_per_gate;
    let zero_rate = p_exp <= 0.0;
    let qber = if zero_rate {
        0.0
    } else {
        (0.5 * noise_per_gate + params.e_opt * signal) / p_exp
    };
    Ok(ChannelOperatingPoint {
        eta,
        p_noise: noise_per_gate,
        p_exp,
        qber,
        s_mu: signal + noise_per_gate,
        s_mu_prime: click(params.mu_prime) + noise_per_gate,
        s_vacuum: noise_per_gate,
        zero_rate,
    })
}

/// A secret-key rate in bits per pulse. `flagged_zero` marks points where
/// the formula went non-positive (or its domain was left) and the rate was
/// clamped: the protocol yields no key there.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint {
    pub per_pulse: f64,
    pub flagged_zero: bool,
}

impl RatePoint {
    fn clamped(raw: f64) -> RatePoint {
        RatePoint {
            per_pulse: raw.max(0.0),
            flagged_zero: raw <= 0.0,
        }
    }

    fn zero() -> RatePoint {
        RatePoint {
            per_pulse: 0.0,
            flagged_zero: true,
        }
    }

    /// Key throughput at the given source repetition rate, bits/s.
    pub fn bits_per_second(&self, rep_rate: f64) -> f64 {
        self.per_pulse * rep_rate
    }
}

/// Ideal single-photon BB84: R = (p_exp/2) [1 - f H2(e) - H2(e)].
pub fn bb84_ideal_rate(
    op: &ChannelOperatingPoint,
    params: &ProtocolParams,
) -> Result<RatePoint, KeyrateError> {
    if op.zero_rate {
        return Ok(RatePoint::zero());
    }
    let h = binary_entropy(op.qber)?;
    Ok(RatePoint::clamped(
        (op.p_exp / 2.0) * (1.0 - params.error_correction * h - h),
    ))
}

/// Worst-case fraction of detected pulses that carried more than one
/// photon,
///
/// Delta = (1 - e^(-mu) - mu e^(-mu)) / (1 - e^(-eta mu))
///
/// clamped to [0, 1]. Delta = 1 means every detection may be tagged and no
/// key survives.
pub fn tagged_fraction(mu: f64, eta: f64) -> Result<f64, KeyrateError> {
    if !(mu > 0.0) || !(eta > 0.0 && eta <= 1.0) {
        return Err(KeyrateError::InvalidChannel(format!(
            "need mu > 0 and eta in (0, 1], got mu = {mu}, eta = {eta}"
        )));
    }
    let multi = 1.0 - (-mu).exp() - mu * (-mu).exp();
    let detected = -(-eta * mu).exp_m1();
    if detected <= 0.0 {
        return Ok(1.0);
    }
    Ok((multi / detected).clamp(0.0, 1.0))
}

/// Weak-pulse BB84 with tagged-bit penalty:
///
/// R = (p_exp/2) [(1 - Delta) - f H2(e) - (1 - Delta) H2(e / (1 - Delta))]
///
/// The privacy-amplification entropy sees the inflated error e/(1-Delta);
/// when that exceeds 1/2 the point is flagged and the rate is zero.
pub fn gllp_rate(
    op: &ChannelOperatingPoint,
    delta: f64,
    params: &ProtocolParams,
) -> Result<RatePoint, KeyrateError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(KeyrateError::InvalidChannel(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    if op.zero_rate {
        return Ok(RatePoint::zero());
    }
    let untagged = 1.0 - delta;
    if untagged <= 0.0 {
        return Ok(RatePoint::zero());
    }
    let inflated = op.qber / untagged;
    if inflated > 0.5 {
        return Ok(RatePoint::zero());
    }
    let h = binary_entropy(op.qber)?;
    let h_inflated = binary_entropy(inflated)?;
    Ok(RatePoint::clamped(
        (op.p_exp / 2.0)
            * (untagged - params.error_correction * h - untagged * h_inflated),
    ))
}

/// Decoy-state upper bound on the tagged fraction from the measured
/// counting rates of the signal (S_mu), bright decoy (S_mu') and vacuum
/// (S_0) intensities:
///
/// Delta <= (mu/(mu'-mu)) ((mu e^(-mu) S_mu')/(mu' e^(-mu') S_mu) - 1)
///          + (mu e^(-mu) S_0)/(mu' S_mu)
pub fn decoy_tagged_bound(
    s_mu: f64,
    s_mu_prime: f64,
    s_vacuum: f64,
    mu: f64,
    mu_prime: f64,
) -> Result<f64, KeyrateError> {
    if !(mu > 0.0 && mu < mu_prime) {
        return Err(KeyrateError::InvalidParams(format!(
            "need 0 < mu < mu_prime, got {mu}, {mu_prime}"
        )));
    }
    if !(s_mu > 0.0) {
        return Err(KeyrateError::UndefinedBound(format!(
            "signal counting rate must be positive, got {s_mu}"
        )));
    }
    let gain = (mu * (-mu).exp()) / (mu_prime * (-mu_prime).exp());
    let first = (mu / (mu_prime - mu)) * (gain * s_mu_prime / s_mu - 1.0);
    let second = (mu * (-mu).exp() * s_vacuum) / (mu_prime * s_mu);
    Ok((first + second).clamp(0.0, 1.0))
}

/// GLLP rate with the worst-case tagged fraction of [`tagged_fraction`].
pub fn weak_pulse_rate(
    eta: f64,
    noise_per_gate: f64,
    mu: f64,
    params: &ProtocolParams,
) -> Result<RatePoint, KeyrateError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(KeyrateError::InvalidChannel(format!(
            "mu must be positive and finite, got {mu}"
        )));
    }
    // No decoy pulses in this protocol; mu_prime only placates the
    // parameter invariant and is never read.
    let p = ProtocolParams {
        mu,
        mu_prime: 2.0 * mu,
        ..*params
    };
    let op = operating_point(eta, noise_per_gate, &p)?;
    let delta = tagged_fraction(mu, eta)?;
    gllp_rate(&op, delta, &p)
}

/// GLLP rate with the decoy-state bound in place of the worst case.
pub fn decoy_rate(
    eta: f64,
    noise_per_gate: f64,
    params: &ProtocolParams,
) -> Result<RatePoint, KeyrateError> {
    let op = operating_point(eta, noise_per_gate, params)?;
    if op.zero_rate {
        return Ok(RatePoint::zero());
    }
    let delta = decoy_tagged_bound(
        op.s_mu,
        op.s_mu_prime,
        op.s_vacuum,
        params.mu,
        params.mu_prime,
    )?;
    gllp_rate(&op, delta, params)
}

/// Best non-decoy rate over the signal intensity: scans mu on a log grid
/// with two refinement rounds. Deterministic.
pub fn optimal_weak_pulse(
    eta: f64,
    noise_per_gate: f64,
    params: &ProtocolParams,
) -> Result<(f64, RatePoint), KeyrateError> {
    let mut lo: f64 = 1e-8;
    let mut hi: f64 = 2.0;
    let mut best = (lo, RatePoint::zero());
    for _ in 0..3 {
        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
        for i in 0..=120 {
            let mu = (ln_lo + (ln_hi - ln_lo) * i as f64 / 120.0).exp();
            let rate = weak_pulse_rate(eta, noise_per_gate, mu, params)?;
            if rate.per_pulse > best.1.per_pulse {
                best = (mu, rate);
            }
        }
        let spread = (ln_hi - ln_lo) / 120.0;
        lo = (best.0.ln() - 2.0 * spread).exp();
        hi = (best.0.ln() + 2.0 * spread).exp();
    }
    Ok(best)
}

// ---- Entanglement distribution ----

/// Where the pair source sits and what kind of links the two photons see.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Source on the satellite, both photons sent to ground stations.
    SatSourceTwoDownlinks,
    /// Source on the satellite, one photon detected on board.
    SatSourceLocalAndDownlink,
    /// Source on the ground, both photons sent up to satellites.
    GroundSourceTwoUplinks,
    /// Source on the ground, one photon detected locally.
    GroundSourceLocalAndUplink,
}

impl Topology {
    pub const ALL: [Topology; 4] = [
        Topology::SatSourceTwoDownlinks,
        Topology::SatSourceLocalAndDownlink,
        Topology::GroundSourceTwoUplinks,
        Topology::GroundSourceLocalAndUplink,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Topology::SatSourceTwoDownlinks => "sat_source_two_downlinks",
            Topology::SatSourceLocalAndDownlink => "sat_source_local_and_downlink",
            Topology::GroundSourceTwoUplinks => "ground_source_two_uplinks",
            Topology::GroundSourceLocalAndUplink => "ground_source_local_and_uplink",
        }
    }
}

/// One detection arm of the coincidence measurement.
#[derive(Debug, Clone, Copy)]
pub struct ArmParams {
    /// Photon collection and detection efficiency of the arm.
    pub efficiency: f64,
    /// Background photon rate at the arm's detector, counts/s.
    pub noise_rate: f64,
    /// Dark count rate, counts/s.
    pub dark_rate: f64,
}

impl ArmParams {
    /// Singles rate of the arm under pair illumination.
    fn singles(&self, pair_rate: f64) -> f64 {
        pair_rate * self.efficiency + self.noise_rate + self.dark_rate
    }
}

/// Coincidence budget of a pair-distribution configuration.
#[derive(Debug, Clone, Copy)]
pub struct CoincidenceBudget {
    /// True pair coincidences, counts/s.
    pub coincidence_rate: f64,
    /// Accidental coincidences within the gate, counts/s.
    pub accidental_rate: f64,
    pub snr: f64,
    pub snr_db: f64,
    /// Two-photon visibility implied by the SNR, V = SNR/(SNR + 2).
    pub visibility: f64,
    /// True when SNR >= 6, the 71% visibility needed to violate a Bell
    /// inequality.
    pub feasible: bool,
}

/// C = P0 eta1 eta2 true coincidences against C_acc = N1 N2 dt accidentals,
/// with per-arm singles N_i = P0 eta_i + noise_i + dark_i.
pub fn entanglement_snr(
    pair_rate: f64,
    gate: f64,
    arm1: &ArmParams,
    arm2: &ArmParams,
) -> Result<CoincidenceBudget, KeyrateError> {
    if !(pair_rate > 0.0 && gate > 0.0) {
        return Err(KeyrateError::InvalidChannel(format!(
            "pair rate and gate must be positive, got {pair_rate}, {gate}"
        )));
    }
    let coincidence_rate = pair_rate * arm1.efficiency * arm2.efficiency;
    let accidental_rate = arm1.singles(pair_rate) * arm2.singles(pair_rate) * gate;
    let snr = coincidence_rate / accidental_rate;
    Ok(CoincidenceBudget {
        coincidence_rate,
        accidental_rate,
        snr,
        snr_db: 10.0 * snr.log10(),
        visibility: snr / (snr + 2.0),
        feasible: snr >= 6.0,
    })
}

/// Resolves a topology into its two detection arms.
pub fn topology_arms(
    topology: Topology,
    local: &ArmParams,
    uplink: &ArmParams,
    downlink: &ArmParams,
) -> (ArmParams, ArmParams) {
    match topology {
        Topology::SatSourceTwoDownlinks => (*downlink, *downlink),
        Topology::SatSourceLocalAndDownlink => (*local, *downlink),
        Topology::GroundSourceTwoUplinks => (*uplink, *uplink),
        Topology::GroundSourceLocalAndUplink => (*local, *uplink),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn entropy_endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(binary_entropy(0.5).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn entropy_matches_frozen_reference() {
        // 30-digit evaluations frozen as regression constants.
        assert_relative_eq!(
            binary_entropy(0.11).unwrap(),
            0.4999159581645280,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            binary_entropy(0.05).unwrap(),
            0.2863969571159561,
            max_relative = 1e-14
        );
    }

    #[test]
    fn entropy_rejects_out_of_domain() {
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
    }

    #[test]
    fn operating_point_matches_frozen_reference() {
        // mu = 0.01, eta = 1e-5, 1e-7 noise per gate.
        let params = ProtocolParams {
            mu: 0.01,
            ..Default::default()
        };
        let op = operating_point(1e-5, 1e-7, &params).unwrap();
        assert_relative_eq!(op.p_exp, 1.9999999500000017e-7, max_relative = 1e-13);
        assert_relative_eq!(op.qber, 0.25500000612499995, max_relative = 1e-13);
        assert!(!op.zero_rate);
    }

    #[test]
    fn noise_free_qber_is_the_optical_floor() {
        let params = ProtocolParams::default();
        let op = operating_point(1e-3, 0.0, &params).unwrap();
        assert_relative_eq!(op.qber, params.e_opt, max_relative = 1e-12);
        let clean = ProtocolParams {
            e_opt: 0.0,
            ..params
        };
        assert_eq!(operating_point(1e-3, 0.0, &clean).unwrap().qber, 0.0);
    }

    #[test]
    fn detection_saturates_at_high_intensity() {
        let params = ProtocolParams {
            mu: 100.0,
            mu_prime: 200.0,
            ..Default::default()
        };
        let op = operating_point(1.0, 0.0, &params).unwrap();
        assert_relative_eq!(op.p_exp, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ideal_rate_matches_frozen_reference() {
        // e = 0.05, f = 1.22, p_exp = 1e-3.
        let op = ChannelOperatingPoint {
            eta: 1e-3,
            p_noise: 0.0,
            p_exp: 1e-3,
            qber: 0.05,
            s_mu: 1e-3,
            s_mu_prime: 1e-3,
            s_vacuum: 0.0,
            zero_rate: false,
        };
        let r = bb84_ideal_rate(&op, &ProtocolParams::default()).unwrap();
        assert_relative_eq!(r.per_pulse, 1.820993776012887e-4, max_relative = 1e-13);
    }

    #[test]
    fn error_free_rate_is_half_the_gain() {
        let op = ChannelOperatingPoint {
            eta: 1e-3,
            p_noise: 0.0,
            p_exp: 1e-3,
            qber: 0.0,
            s_mu: 1e-3,
            s_mu_prime: 1e-3,
            s_vacuum: 0.0,
            zero_rate: false,
        };
        let r = bb84_ideal_rate(&op, &ProtocolParams::default()).unwrap();
        assert_relative_eq!(r.per_pulse, 5e-4, max_relative = 1e-14);
    }

    #[test]
    fn half_error_rate_yields_no_key() {
        let op = ChannelOperatingPoint {
            eta: 1e-3,
            p_noise: 0.0,
            p_exp: 1e-3,
            qber: 0.5,
            s_mu: 1e-3,
            s_mu_prime: 1e-3,
            s_vacuum: 0.0,
            zero_rate: false,
        };
        let r = bb84_ideal_rate(&op, &ProtocolParams::default()).unwrap();
        assert_eq!(r.per_pulse, 0.0);
        assert!(r.flagged_zero);
    }

    #[test]
    fn tagged_fraction_collapses_for_lossy_uplink() {
        // mu = 0.1 at eta = 1e-5: multiphoton emissions dwarf detections.
        let d = tagged_fraction(0.1, 1e-5).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn tagged_fraction_vanishes_for_faint_source() {
        let d = tagged_fraction(1e-9, 1.0).unwrap();
        assert!(d < 1e-8, "delta = {d}");
    }

    #[test]
    fn tagged_fraction_non_increasing_in_eta() {
        let mut last = 2.0;
        for eta in [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let d = tagged_fraction(0.27, eta).unwrap();
            assert!(d <= last, "eta = {eta}");
            last = d;
        }
    }

    #[test]
    fn gllp_reduces_to_ideal_at_zero_delta() {
        let params = ProtocolParams::default();
        for (p_exp, e) in [(1e-3, 0.05), (1e-6, 0.01), (0.2, 0.11), (1e-4, 0.0)] {
            let op = ChannelOperatingPoint {
                eta: 1e-3,
                p_noise: 0.0,
                p_exp,
                qber: e,
                s_mu: p_exp,
                s_mu_prime: p_exp,
                s_vacuum: 0.0,
                zero_rate: false,
            };
            let ideal = bb84_ideal_rate(&op, &params).unwrap().per_pulse;
            let gllp = gllp_rate(&op, 0.0, &params).unwrap().per_pulse;
            assert_relative_eq!(gllp, ideal, max_relative = 1e-15);
        }
    }

    #[test]
    fn full_tagging_kills_the_key() {
        let op = ChannelOperatingPoint {
            eta: 1e-3,
            p_noise: 0.0,
            p_exp: 1e-3,
            qber: 0.01,
            s_mu: 1e-3,
            s_mu_prime: 1e-3,
            s_vacuum: 0.0,
            zero_rate: false,
        };
        let r = gllp_rate(&op, 1.0, &ProtocolParams::default()).unwrap();
        assert_eq!(r.per_pulse, 0.0);
        assert!(r.flagged_zero);
    }

    #[test]
    fn inflated_error_beyond_half_flags_zero() {
        let op = ChannelOperatingPoint {
            eta: 1e-3,
            p_noise: 0.0,
            p_exp: 1e-3,
            qber: 0.3,
            s_mu: 1e-3,
            s_mu_prime: 1e-3,
            s_vacuum: 0.0,
            zero_rate: false,
        };
        let r = gllp_rate(&op, 0.45, &ProtocolParams::default()).unwrap();
        assert!(r.flagged_zero);
    }

    #[test]
    fn decoy_bound_vanishes_for_matched_gains() {
        // S_mu'/S_mu equal to the Poisson gain ratio and no vacuum counts.
        let (mu, mu_prime) = (0.27, 0.4);
        let s_mu = 1e-4;
        let s_mu_prime = s_mu * (mu_prime * (-mu_prime as f64).exp()) / (mu * (-mu as f64).exp());
        let d = decoy_tagged_bound(s_mu, s_mu_prime, 0.0, mu, mu_prime).unwrap();
        assert!(d.abs() < 1e-12, "bound = {d}");
    }

    #[test]
    fn decoy_bound_matches_frozen_poisson_value() {
        // Eavesdropper-free Poisson channel at eta = 1e-3; frozen from a
        // 30-digit evaluation.
        let eta = 1e-3;
        let s = |x: f64| -> f64 { 1.0 - (-x * eta).exp() };
        let d = decoy_tagged_bound(s(0.27), s(0.4), 0.0, 0.27, 0.4).unwrap();
        assert_relative_eq!(d, 0.28818214480694341, max_relative = 1e-12);
        // The worst-case bound at the same point is off the clamp scale.
        let worst = tagged_fraction(0.27, eta).unwrap();
        assert!(d < worst);
    }

    #[test]
    fn decoy_beats_worst_case_across_low_eta() {
        for eta in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let s = |x: f64| -> f64 { 1.0 - (-x * eta).exp() };
            let d = decoy_tagged_bound(s(0.27), s(0.4), 0.0, 0.27, 0.4).unwrap();
            let worst = tagged_fraction(0.27, eta).unwrap();
            assert!(d < worst, "eta = {eta}: decoy {d} vs worst {worst}");
        }
    }

    #[test]
    fn decoy_bound_requires_signal_counts() {
        assert!(decoy_tagged_bound(0.0, 1e-4, 0.0, 0.27, 0.4).is_err());
        assert!(decoy_tagged_bound(1e-4, 1e-4, 0.0, 0.4, 0.27).is_err());
    }

    #[test]
    fn rates_monotone_in_efficiency() {
        let params = ProtocolParams::default();
        let mut last_decoy = 0.0;
        let mut last_weak = 0.0;
        for eta in [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
            let d = decoy_rate(eta, 0.0, &params).unwrap().per_pulse;
            let w = optimal_weak_pulse(eta, 0.0, &params).unwrap().1.per_pulse;
            assert!(d >= last_decoy, "eta = {eta}");
            assert!(w >= last_weak, "eta = {eta}");
            last_decoy = d;
            last_weak = w;
        }
    }

    fn fitted_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(x, y) in points {
            let (lx, ly) = (x.ln(), y.ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn decoy_scales_linearly_and_weak_pulse_quadratically() {
        let params = ProtocolParams::default();
        let mut decoy = Vec::new();
        let mut weak = Vec::new();
        for i in 0..=20 {
            let eta = 10f64.powf(-6.0 + 5.0 * i as f64 / 20.0);
            decoy.push((eta, decoy_rate(eta, 0.0, &params).unwrap().per_pulse));
            weak.push((
                eta,
                optimal_weak_pulse(eta, 0.0, &params).unwrap().1.per_pulse,
            ));
        }
        let decoy_slope = fitted_slope(&decoy);
        let weak_slope = fitted_slope(&weak);
        assert!(
            (decoy_slope - 1.0).abs() < 0.2,
            "decoy slope = {decoy_slope}"
        );
        assert!((weak_slope - 2.0).abs() < 0.2, "weak slope = {weak_slope}");
    }

    #[test]
    fn both_arms_local_is_comfortably_feasible() {
        let params = ProtocolParams::default();
        let local = ArmParams {
            efficiency: params.local_efficiency,
            noise_rate: params.dark_rate,
            dark_rate: params.dark_rate,
        };
        let b = entanglement_snr(1e6, 1e-9, &local, &local).unwrap();
        assert!(b.snr > 900.0, "snr = {}", b.snr);
        assert!(b.feasible);
        assert_relative_eq!(b.visibility, b.snr / (b.snr + 2.0), max_relative = 1e-14);
    }

    #[test]
    fn snr_declines_with_gate_and_noise() {
        let arm = ArmParams {
            efficiency: 0.1,
            noise_rate: 1e4,
            dark_rate: 200.0,
        };
        let narrow = entanglement_snr(1e6, 1e-9, &arm, &arm).unwrap().snr;
        let wide = entanglement_snr(1e6, 1e-8, &arm, &arm).unwrap().snr;
        assert!(narrow > wide);
        let noisy = ArmParams {
            noise_rate: 1e6,
            ..arm
        };
        let loud = entanglement_snr(1e6, 1e-9, &arm, &noisy).unwrap().snr;
        assert!(narrow > loud);
    }

    #[test]
    fn topology_resolution_picks_the_right_arms() {
        let local = ArmParams {
            efficiency: 0.5,
            noise_rate: 0.0,
            dark_rate: 200.0,
        };
        let up = ArmParams {
            efficiency: 1e-5,
            noise_rate: 1.0,
            dark_rate: 200.0,
        };
        let down = ArmParams {
            efficiency: 1e-2,
            noise_rate: 1e4,
            dark_rate: 200.0,
        };
        let (a, b) = topology_arms(Topology::SatSourceLocalAndDownlink, &local, &up, &down);
        assert_eq!(a.efficiency, 0.5);
        assert_eq!(b.efficiency, 1e-2);
        let (a, b) = topology_arms(Topology::GroundSourceTwoUplinks, &local, &up, &down);
        assert_eq!(a.efficiency, 1e-5);
        assert_eq!(b.efficiency, 1e-5);
    }

    #[test]
    fn params_validation_rejects_inverted_intensities() {
        let p = ProtocolParams {
            mu: 0.5,
            mu_prime: 0.3,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(ProtocolParams::default().validate().is_ok());
    }
}
