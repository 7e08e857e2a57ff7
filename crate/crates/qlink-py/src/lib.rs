//! Python bindings. Functions mirror the core library's operations with
//! degree/nanometre/kilometre arguments where that is the natural unit at
//! the call site, and return plain dicts so results feed straight into
//! numpy or pandas.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use qlink_core::atmosphere::{
    beam_widths, fried_parameter, link_efficiency, Direction, LinkGeometry, TurbulenceProfile,
};
use qlink_core::keyrate::{self, ArmParams, ProtocolParams};
use qlink_core::numeric::QuadratureConfig;
use qlink_core::polarization::{
    aluminum_like, probe_wavelength_qber, stokes_statistics, time_multiplexed_qber, MirrorModel,
    PassModel, StokesComponent,
};
use qlink_core::radiometry::{
    self, moon_factor, uplink_day_noise, uplink_night_noise, FilterWindow, NoiseEnvironment,
};
use qlink_core::scenario::parse_scenario;
use qlink_core::sync;
use serde_json::Value;
use std::path::PathBuf;

fn invalid(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_direction(direction: &str) -> PyResult<Direction> {
    match direction {
        "uplink" => Ok(Direction::Uplink),
        "downlink" => Ok(Direction::Downlink),
        other => Err(invalid(format!(
            "direction must be \"uplink\" or \"downlink\", got {other:?}"
        ))),
    }
}

fn geometry(
    wavelength_nm: f64,
    path_length_km: f64,
    direction: &str,
    tx_aperture_m: f64,
    ground_altitude_m: f64,
) -> PyResult<LinkGeometry> {
    LinkGeometry::new(
        wavelength_nm * 1e-9,
        tx_aperture_m,
        path_length_km * 1e3,
        parse_direction(direction)?,
    )
    .and_then(|g| g.with_ground_altitude(ground_altitude_m))
    .map_err(invalid)
}

fn profile(a_coefficient: f64, wind_speed_m_s: f64) -> TurbulenceProfile {
    TurbulenceProfile {
        a_coefficient,
        wind_speed: wind_speed_m_s,
    }
}

/// Fried parameter r0 in metres for a zenith link.
#[pyfunction]
#[pyo3(signature = (wavelength_nm, path_length_km, direction="uplink", tx_aperture_m=1.5,
                    ground_altitude_m=0.0, a_coefficient=1.7e-14, wind_speed_m_s=21.0))]
#[allow(clippy::too_many_arguments)]
fn fried_parameter_m(
    wavelength_nm: f64,
    path_length_km: f64,
    direction: &str,
    tx_aperture_m: f64,
    ground_altitude_m: f64,
    a_coefficient: f64,
    wind_speed_m_s: f64,
) -> PyResult<f64> {
    let g = geometry(
        wavelength_nm,
        path_length_km,
        direction,
        tx_aperture_m,
        ground_altitude_m,
    )?;
    Ok(fried_parameter(
        &g,
        &profile(a_coefficient, wind_speed_m_s),
        &QuadratureConfig::default(),
    ))
}

/// Long- and short-term beam widths plus the wander variance at the
/// receiver plane.
#[pyfunction]
#[pyo3(signature = (wavelength_nm, path_length_km, direction="uplink", tx_aperture_m=1.5,
                    ground_altitude_m=0.0, a_coefficient=1.7e-14, wind_speed_m_s=21.0))]
#[allow(clippy::too_many_arguments)]
fn beam_widths_m<'py>(
    py: Python<'py>,
    wavelength_nm: f64,
    path_length_km: f64,
    direction: &str,
    tx_aperture_m: f64,
    ground_altitude_m: f64,
    a_coefficient: f64,
    wind_speed_m_s: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = geometry(
        wavelength_nm,
        path_length_km,
        direction,
        tx_aperture_m,
        ground_altitude_m,
    )?;
    let r0 = fried_parameter(
        &g,
        &profile(a_coefficient, wind_speed_m_s),
        &QuadratureConfig::default(),
    );
    let w = beam_widths(&g, r0);
    let out = PyDict::new(py);
    out.set_item("r0_m", w.r0)?;
    out.set_item("w_st_m", w.w_st)?;
    out.set_item("w_lt_m", w.w_lt)?;
    out.set_item("beta_sq_m2", w.beta_sq)?;
    out.set_item("wander_ratio", w.wander_ratio())?;
    Ok(out)
}

/// Collection efficiency and attenuation of a circular receiver centred
/// on the long-term beam.
#[pyfunction]
#[pyo3(signature = (wavelength_nm, path_length_km, receiver_radius_m, direction="uplink",
                    tx_aperture_m=1.5, eta0=0.1, ground_altitude_m=0.0,
                    a_coefficient=1.7e-14, wind_speed_m_s=21.0))]
#[allow(clippy::too_many_arguments)]
fn link_attenuation<'py>(
    py: Python<'py>,
    wavelength_nm: f64,
    path_length_km: f64,
    receiver_radius_m: f64,
    direction: &str,
    tx_aperture_m: f64,
    eta0: f64,
    ground_altitude_m: f64,
    a_coefficient: f64,
    wind_speed_m_s: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = geometry(
        wavelength_nm,
        path_length_km,
        direction,
        tx_aperture_m,
        ground_altitude_m,
    )?;
    let r0 = fried_parameter(
        &g,
        &profile(a_coefficient, wind_speed_m_s),
        &QuadratureConfig::default(),
    );
    let w = beam_widths(&g, r0);
    let eff = link_efficiency(w.w_lt, receiver_radius_m, eta0).map_err(invalid)?;
    let out = PyDict::new(py);
    out.set_item("eta", eff.eta)?;
    out.set_item("attenuation_db", eff.attenuation_db)?;
    out.set_item("r0_m", r0)?;
    out.set_item("w_lt_m", w.w_lt)?;
    Ok(out)
}

/// Sky-glow photon rate collected by an uplink satellite receiver,
/// photons per second per nanometre of optical bandwidth.
#[pyfunction]
#[pyo3(signature = (receiver_radius_m, ifov_rad, period="night"))]
fn uplink_background_rate(receiver_radius_m: f64, ifov_rad: f64, period: &str) -> PyResult<f64> {
    let env = NoiseEnvironment::default();
    match period {
        "day" => Ok(uplink_day_noise(&env, receiver_radius_m, ifov_rad)),
        "night" => Ok(uplink_night_noise(&env, receiver_radius_m, ifov_rad)),
        other => Err(invalid(format!(
            "period must be \"day\" or \"night\", got {other:?}"
        ))),
    }
}

/// Night/day background ratio implied by the default Earth/Moon constants.
#[pyfunction]
fn default_moon_factor() -> f64 {
    moon_factor(&NoiseEnvironment::default())
}

/// Per-gate signal-to-noise of a gated photon counter.
#[pyfunction]
#[pyo3(signature = (signal_rate_hz, noise_rate_hz, dark_rate_hz=200.0, gate_ns=1.0))]
fn snr_report<'py>(
    py: Python<'py>,
    signal_rate_hz: f64,
    noise_rate_hz: f64,
    dark_rate_hz: f64,
    gate_ns: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let window = FilterWindow {
        bandwidth_nm: 1.0,
        gate: gate_ns * 1e-9,
    };
    let report =
        radiometry::snr(signal_rate_hz, noise_rate_hz, dark_rate_hz, &window).map_err(invalid)?;
    let out = PyDict::new(py);
    out.set_item("signal_per_gate", report.signal)?;
    out.set_item("noise_per_gate", report.noise)?;
    out.set_item("snr", report.snr)?;
    out.set_item("snr_db", report.snr_db)?;
    out.set_item("noise_free", report.noise_free)?;
    Ok(out)
}

fn rate_dict<'py>(
    py: Python<'py>,
    point: keyrate::RatePoint,
    rep_rate_hz: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("per_pulse", point.per_pulse)?;
    out.set_item("bits_per_s", point.bits_per_second(rep_rate_hz))?;
    out.set_item("flagged_zero", point.flagged_zero)?;
    Ok(out)
}

/// Secure key rate of the non-decoy weak-pulse protocol at channel
/// efficiency `eta`.
#[pyfunction]
#[pyo3(signature = (eta, noise_per_gate=0.0, mu=0.27, rep_rate_hz=1e7))]
fn weak_pulse_rate<'py>(
    py: Python<'py>,
    eta: f64,
    noise_per_gate: f64,
    mu: f64,
    rep_rate_hz: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = ProtocolParams::default();
    let point = keyrate::weak_pulse_rate(eta, noise_per_gate, mu, &params).map_err(invalid)?;
    rate_dict(py, point, rep_rate_hz)
}

/// Secure key rate with the decoy-state multiphoton bound.
#[pyfunction]
#[pyo3(signature = (eta, noise_per_gate=0.0, mu=0.27, mu_prime=0.4, rep_rate_hz=1e7))]
fn decoy_rate<'py>(
    py: Python<'py>,
    eta: f64,
    noise_per_gate: f64,
    mu: f64,
    mu_prime: f64,
    rep_rate_hz: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = ProtocolParams {
        mu,
        mu_prime,
        ..ProtocolParams::default()
    };
    let point = keyrate::decoy_rate(eta, noise_per_gate, &params).map_err(invalid)?;
    rate_dict(py, point, rep_rate_hz)
}

/// Best non-decoy rate over the signal intensity.
#[pyfunction]
#[pyo3(signature = (eta, noise_per_gate=0.0, rep_rate_hz=1e7))]
fn optimal_weak_pulse<'py>(
    py: Python<'py>,
    eta: f64,
    noise_per_gate: f64,
    rep_rate_hz: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = ProtocolParams::default();
    let (mu, point) = keyrate::optimal_weak_pulse(eta, noise_per_gate, &params).map_err(invalid)?;
    let out = rate_dict(py, point, rep_rate_hz)?;
    out.set_item("mu", mu)?;
    Ok(out)
}

/// Coincidence budget of a pair source feeding two detection arms, each
/// given as (efficiency, noise_rate_hz, dark_rate_hz).
#[pyfunction]
#[pyo3(signature = (pair_rate_hz, arm1, arm2, gate_ns=1.0))]
fn entanglement_snr<'py>(
    py: Python<'py>,
    pair_rate_hz: f64,
    arm1: (f64, f64, f64),
    arm2: (f64, f64, f64),
    gate_ns: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let arm = |(efficiency, noise_rate, dark_rate): (f64, f64, f64)| ArmParams {
        efficiency,
        noise_rate,
        dark_rate,
    };
    let budget =
        keyrate::entanglement_snr(pair_rate_hz, gate_ns * 1e-9, &arm(arm1), &arm(arm2))
            .map_err(invalid)?;
    let out = PyDict::new(py);
    out.set_item("coincidence_rate_per_s", budget.coincidence_rate)?;
    out.set_item("accidental_rate_per_s", budget.accidental_rate)?;
    out.set_item("snr", budget.snr)?;
    out.set_item("snr_db", budget.snr_db)?;
    out.set_item("visibility", budget.visibility)?;
    out.set_item("feasible", budget.feasible)?;
    Ok(out)
}

/// Residual error probability of probe-wavelength compensation over a
/// seeded ensemble of passes with aluminum-coated steering mirrors.
#[pyfunction]
#[pyo3(signature = (altitude_km, probe_wavelength_nm, signal_wavelength_nm=800.0,
                    passes=100, seed=0, step_s=1.0))]
fn probe_compensation_qber(
    altitude_km: f64,
    probe_wavelength_nm: f64,
    signal_wavelength_nm: f64,
    passes: usize,
    seed: u64,
    step_s: f64,
) -> PyResult<f64> {
    let mirror = MirrorModel::Metallic(aluminum_like());
    let mut model = PassModel::new(altitude_km * 1e3, mirror.clone());
    model.step = step_s;
    let ensemble = model.draw_ensemble(passes, seed).map_err(invalid)?;
    probe_wavelength_qber(
        &ensemble,
        &mirror,
        model.step,
        signal_wavelength_nm * 1e-9,
        probe_wavelength_nm * 1e-9,
    )
    .map_err(invalid)
}

/// Residual error probability of time-multiplexed compensation at probe
/// rate `probe_rate_hz`.
#[pyfunction]
#[pyo3(signature = (altitude_km, probe_rate_hz, wavelength_nm=800.0, passes=100, seed=0,
                    pulses_per_interval=8, max_intervals=256))]
#[allow(clippy::too_many_arguments)]
fn time_multiplexed_compensation_qber(
    altitude_km: f64,
    probe_rate_hz: f64,
    wavelength_nm: f64,
    passes: usize,
    seed: u64,
    pulses_per_interval: usize,
    max_intervals: usize,
) -> PyResult<f64> {
    let mirror = MirrorModel::Metallic(aluminum_like());
    let model = PassModel::new(altitude_km * 1e3, mirror.clone());
    let ensemble = model.draw_ensemble(passes, seed).map_err(invalid)?;
    time_multiplexed_qber(
        &ensemble,
        &mirror,
        wavelength_nm * 1e-9,
        probe_rate_hz,
        pulses_per_interval,
        max_intervals,
    )
    .map_err(invalid)
}

/// Pooled Stokes drift-rate statistics over a seeded pass ensemble.
#[pyfunction]
#[pyo3(signature = (altitude_km, passes=100, seed=0, component="s2", bins=41,
                    wavelength_nm=800.0, step_s=1.0))]
#[allow(clippy::too_many_arguments)]
fn stokes_drift_stats<'py>(
    py: Python<'py>,
    altitude_km: f64,
    passes: usize,
    seed: u64,
    component: &str,
    bins: usize,
    wavelength_nm: f64,
    step_s: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let component = match component {
        "s1" => StokesComponent::S1,
        "s2" => StokesComponent::S2,
        "s3" => StokesComponent::S3,
        other => {
            return Err(invalid(format!(
                "component must be \"s1\", \"s2\" or \"s3\", got {other:?}"
            )))
        }
    };
    let mirror = MirrorModel::Metallic(aluminum_like());
    let mut model = PassModel::new(altitude_km * 1e3, mirror.clone());
    model.step = step_s;
    let ensemble = model.draw_ensemble(passes, seed).map_err(invalid)?;
    let stats = stokes_statistics(
        &ensemble,
        &mirror,
        wavelength_nm * 1e-9,
        &qlink_core::jones::JonesVector::vertical(),
        model.step,
        component,
        bins,
    )
    .map_err(invalid)?;
    let out = PyDict::new(py);
    out.set_item("max_abs_per_s", stats.max_abs)?;
    out.set_item("samples", stats.samples)?;
    let histogram = PyList::empty(py);
    for (center, count) in &stats.histogram {
        histogram.append((*center, *count))?;
    }
    out.set_item("histogram", histogram)?;
    Ok(out)
}

/// Synchronization pulse rate needed to hold `accuracy_ns` under a drift
/// of `max_drift` seconds per second, with the margin band.
#[pyfunction]
#[pyo3(signature = (max_drift, accuracy_ns=1.0))]
fn required_sync_rate<'py>(
    py: Python<'py>,
    max_drift: f64,
    accuracy_ns: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let rate = sync::required_sync_rate(max_drift, accuracy_ns * 1e-9).map_err(invalid)?;
    let out = PyDict::new(py);
    out.set_item("base_hz", rate.base)?;
    out.set_item("margin_low_hz", rate.margin_low)?;
    out.set_item("margin_high_hz", rate.margin_high)?;
    Ok(out)
}

/// Drift statistics of a synthesized circular overhead pass.
#[pyfunction]
#[pyo3(signature = (altitude_km, step_s=1.0, min_elevation_deg=10.0, bins=41))]
fn pass_drift_stats<'py>(
    py: Python<'py>,
    altitude_km: f64,
    step_s: f64,
    min_elevation_deg: f64,
    bins: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let series = sync::synthesize_pass(altitude_km * 1e3, step_s, min_elevation_deg.to_radians())
        .map_err(invalid)?;
    let stats = sync::drift_statistics(&series, bins).map_err(invalid)?;
    let out = PyDict::new(py);
    out.set_item("samples", stats.samples)?;
    out.set_item("max_abs", stats.max_abs)?;
    out.set_item("range_rate_one_way_m_s", stats.range_rate_one_way)?;
    out.set_item("range_rate_two_way_m_s", stats.range_rate_two_way)?;
    Ok(out)
}

fn json_to_py(py: Python<'_>, value: &Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        Value::Null => py.None(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn load_scenario(path: PathBuf, seed: Option<u64>) -> PyResult<qlink_core::scenario::Scenario> {
    let mut scenario = parse_scenario(&path).map_err(invalid)?;
    scenario.validate().map_err(invalid)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn table_to_py<'py>(
    py: Python<'py>,
    table: qlink_core::figures::FigureOutput,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("columns", table.columns)?;
    let rows = PyList::empty(py);
    for row in &table.rows {
        rows.append(PyList::new(py, row)?)?;
    }
    out.set_item("rows", rows)?;
    out.set_item("meta", json_to_py(py, &table.meta)?)?;
    Ok(out)
}

/// Evaluates one figure of a scenario file and returns
/// {columns, rows, meta}. Row cells are the exact strings the CLI writes.
#[pyfunction]
#[pyo3(signature = (figure_id, scenario_path, seed=None))]
fn run_figure<'py>(
    py: Python<'py>,
    figure_id: &str,
    scenario_path: PathBuf,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let figure: qlink_core::figures::FigureId = figure_id.parse().map_err(invalid)?;
    let scenario = load_scenario(scenario_path, seed)?;
    let table = qlink_core::figures::run_figure(figure, &scenario).map_err(invalid)?;
    table_to_py(py, table)
}

/// Evaluates the scenario's sweep block; same shape as `run_figure`.
#[pyfunction]
#[pyo3(signature = (scenario_path, seed=None))]
fn run_sweep<'py>(
    py: Python<'py>,
    scenario_path: PathBuf,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let scenario = load_scenario(scenario_path, seed)?;
    let table = qlink_core::figures::sweep(&scenario).map_err(invalid)?;
    table_to_py(py, table)
}

/// Parses and validates a scenario file, returning its name.
#[pyfunction]
fn validate_scenario(scenario_path: PathBuf) -> PyResult<String> {
    Ok(load_scenario(scenario_path, None)?.name)
}

#[pymodule]
fn qlink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fried_parameter_m, m)?)?;
    m.add_function(wrap_pyfunction!(beam_widths_m, m)?)?;
    m.add_function(wrap_pyfunction!(link_attenuation, m)?)?;
    m.add_function(wrap_pyfunction!(uplink_background_rate, m)?)?;
    m.add_function(wrap_pyfunction!(default_moon_factor, m)?)?;
    m.add_function(wrap_pyfunction!(snr_report, m)?)?;
    m.add_function(wrap_pyfunction!(weak_pulse_rate, m)?)?;
    m.add_function(wrap_pyfunction!(decoy_rate, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_weak_pulse, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_snr, m)?)?;
    m.add_function(wrap_pyfunction!(probe_compensation_qber, m)?)?;
    m.add_function(wrap_pyfunction!(time_multiplexed_compensation_qber, m)?)?;
    m.add_function(wrap_pyfunction!(stokes_drift_stats, m)?)?;
    m.add_function(wrap_pyfunction!(required_sync_rate, m)?)?;
    m.add_function(wrap_pyfunction!(pass_drift_stats, m)?)?;
    m.add_function(wrap_pyfunction!(run_figure, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate_scenario, m)?)?;
    Ok(())
}
