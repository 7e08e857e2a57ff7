//! Monte-Carlo cross-check of the closed-form BB84 error probability.
//!
//! The simulation knows nothing about the closed form: it prepares one of
//! the four signal states uniformly at random, applies the residual
//! operator, and scores a Bernoulli trial against the overlap with the
//! orthogonal detector port.

use num_complex::Complex64;
use qlink_core::jones::{Jones, JonesVector};
use qlink_core::polarization::qber_from_residual;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn random_unitary(rng: &mut ChaCha12Rng) -> Jones {
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let alpha = rng.random_range(0.0..std::f64::consts::TAU);
    let beta = rng.random_range(0.0..std::f64::consts::TAU);
    let phases = Jones::diagonal(
        Complex64::from_polar(1.0, alpha),
        Complex64::from_polar(1.0, beta),
    );
    Jones::rotation(theta) * phases * Jones::rotation(phi)
}

/// Probability that `sent` comes out of channel `e` in the detector port
/// orthogonal to it.
fn flip_probability(e: &Jones, sent: &JonesVector, orthogonal: &JonesVector) -> f64 {
    orthogonal.inner(&e.apply(sent)).norm_sqr()
}

fn simulate(e: &Jones, shots: u64, rng: &mut ChaCha12Rng) -> f64 {
    let states = [
        (JonesVector::horizontal(), JonesVector::vertical()),
        (JonesVector::vertical(), JonesVector::horizontal()),
        (JonesVector::diagonal(), JonesVector::antidiagonal()),
        (JonesVector::antidiagonal(), JonesVector::diagonal()),
    ];
    let mut errors = 0u64;
    for _ in 0..shots {
        let (sent, orthogonal) = &states[rng.random_range(0..states.len())];
        if rng.random::<f64>() < flip_probability(e, sent, orthogonal) {
            errors += 1;
        }
    }
    errors as f64 / shots as f64
}

#[test]
fn closed_form_matches_monte_carlo_within_three_sigma() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x9b3e);
    const SHOTS: u64 = 1_000_000;
    for case in 0..10 {
        let e = random_unitary(&mut rng);
        let analytic = qber_from_residual(&e);
        let sampled = simulate(&e, SHOTS, &mut rng);
        let sigma = (analytic * (1.0 - analytic) / SHOTS as f64).sqrt();
        let tolerance = 3.0 * sigma + 1e-9;
        assert!(
            (sampled - analytic).abs() <= tolerance,
            "case {case}: sampled {sampled} vs analytic {analytic} \
             (|diff| {:.3e} > 3 sigma {:.3e})",
            (sampled - analytic).abs(),
            tolerance
        );
    }
}

#[test]
fn identity_channel_has_zero_error_probability() {
    assert!(qber_from_residual(&Jones::identity()) <= 1e-12);
}

#[test]
fn quarter_turn_rotation_flips_every_state() {
    let e = Jones::rotation(std::f64::consts::FRAC_PI_2);
    assert_eq!(qber_from_residual(&e), 1.0);
}
