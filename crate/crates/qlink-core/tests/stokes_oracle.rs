//! Checks the drift rates reported on a 1 s sampling grid against central
//! differences of the channel itself taken with a 10 ms stencil, which are
//! effectively exact for this geometry.

use qlink_core::jones::JonesVector;
use qlink_core::polarization::{stokes_series, MirrorModel, PassGeometry};

#[test]
fn coarse_grid_derivatives_track_fine_stencil() {
    let altitude = 500e3;
    let pass = PassGeometry::new(altitude, 60f64.to_radians(), 10f64.to_radians()).unwrap();
    let mirror = MirrorModel::Ideal;
    let wavelength = 800e-9;
    let input = JonesVector::vertical();

    let coarse = stokes_series(&pass, &mirror, wavelength, &input, 1.0).unwrap();
    let max_rate = coarse.ds_dt.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_rate > 0.0);

    let stokes_at = |t: f64| -> [f64; 3] {
        let c = pass.channel_jones(t, wavelength, &mirror).unwrap();
        c.apply(&input).normalized().stokes()
    };

    let h = 0.01;
    let mut checked = 0usize;
    for (i, &t) in coarse.times.iter().enumerate() {
        // Endpoint samples use one-sided differences, and the fine stencil
        // must stay inside the visibility window.
        if i == 0 || i + 1 == coarse.times.len() {
            continue;
        }
        let ahead = stokes_at(t + h);
        let behind = stokes_at(t - h);
        for j in 0..3 {
            let fine = (ahead[j] - behind[j]) / (2.0 * h);
            let diff = (coarse.ds_dt[j][i] - fine).abs();
            assert!(
                diff <= 1e-5 + 1e-3 * max_rate,
                "component {} at t = {t}: coarse {} vs fine {} (diff {diff:.3e})",
                j + 1,
                coarse.ds_dt[j][i],
                fine
            );
        }
        checked += 1;
    }
    assert!(checked > 100, "only {checked} interior samples checked");
}
