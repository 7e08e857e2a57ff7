//! Figure and sweep evaluation: turns a validated scenario into the long
//! format tables the CLI writes to disk.
//!
//! Every figure is a pure function of (scenario, seed); all randomness
//! flows through the scenario seed, so identical inputs give identical
//! tables. Values are formatted with the shortest round-trip float
//! representation, making byte-identical output a direct consequence of
//! value-identical results.

use crate::atmosphere::{
    beam_widths, fried_parameter, link_efficiency, AtmosphereError, Direction, LinkEfficiency,
};
use crate::jones::JonesVector;
use crate::keyrate::{
    bb84_ideal_rate, decoy_rate, entanglement_snr, operating_point, optimal_weak_pulse,
    topology_arms, weak_pulse_rate, ArmParams, KeyrateError, ProtocolParams, Topology,
};
use crate::numeric::QuadratureConfig;
use crate::polarization::{
    probe_wavelength_qber, stokes_statistics, time_multiplexed_qber, PolarizationError,
};
use crate::radiometry::{
    downlink_noise_power, fov_solid_angle, snr, uplink_day_noise, uplink_night_noise,
    FilterWindow, NoiseEnvironment, RadiometryError, SnrReport,
};
use crate::scenario::{
    GeometryBlock, PeriodSpec, RateModel, Scenario, ScenarioError, SchemeSpec, SweepQuantity,
};
use crate::sync::{drift_statistics, required_sync_rate, synthesize_pass, SyncError};
use serde_json::{json, Value};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FigureError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("atmosphere: {0}")]
    Atmosphere(#[from] AtmosphereError),
    #[error("radiometry: {0}")]
    Radiometry(#[from] RadiometryError),
    #[error("key rate: {0}")]
    Keyrate(#[from] KeyrateError),
    #[error("polarization: {0}")]
    Polarization(#[from] PolarizationError),
    #[error("sync: {0}")]
    Sync(#[from] SyncError),
    #[error("{0}")]
    UnknownFigure(String),
    #[error("column {column} produced the non-finite value {value}")]
    NonFinite { column: &'static str, value: f64 },
}

impl FigureError {
    /// True for NaN/infinity failures; the CLI maps these to their own
    /// exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(self, FigureError::NonFinite { .. })
    }
}

/// Data-producing figures. Figures 3, 8 and 9 of the numbering are
/// schematics with no numeric content and have no id here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig10,
    Fig11,
    Fig12,
    Fig13,
    Fig14,
    Fig15,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig10,
        FigureId::Fig11,
        FigureId::Fig12,
        FigureId::Fig13,
        FigureId::Fig14,
        FigureId::Fig15,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig10 => "fig10",
            FigureId::Fig11 => "fig11",
            FigureId::Fig12 => "fig12",
            FigureId::Fig13 => "fig13",
            FigureId::Fig14 => "fig14",
            FigureId::Fig15 => "fig15",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FigureId {
    type Err = FigureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        for fig in FigureId::ALL {
            if fig.id() == s {
                return Ok(fig);
            }
        }
        let reason = match s {
            "fig3" | "fig8" | "fig9" => {
                format!("{s} is a schematic illustration with no data to generate")
            }
            _ => format!(
                "unknown figure {s:?}; available: {}",
                FigureId::ALL.map(|f| f.id()).join(", ")
            ),
        };
        Err(FigureError::UnknownFigure(reason))
    }
}

/// One long-format table plus its sidecar metadata.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub meta: Value,
}

impl FigureOutput {
    /// CSV rendering: header line, then one comma-joined line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn num(column: &'static str, value: f64) -> Result<String, FigureError> {
    if value.is_finite() {
        Ok(format!("{value}"))
    } else {
        Err(FigureError::NonFinite { column, value })
    }
}

fn flag(value: bool) -> String {
    if value { "true" } else { "false" }.to_string()
}

fn base_meta(figure: &str, scenario: &Scenario, parameters: Value) -> Value {
    json!({
        "figure": figure,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": parameters,
    })
}

fn merge_meta(mut meta: Value, extras: Value) -> Value {
    if let (Some(base), Some(extra)) = (meta.as_object_mut(), extras.as_object()) {
        for (k, v) in extra {
            base.insert(k.clone(), v.clone());
        }
    }
    meta
}

/// Turbulence, collection and background budget of one configured link.
struct LinkBudget {
    efficiency: LinkEfficiency,
    /// Background photon rate inside the filter bandwidth, counts/s at the
    /// detector.
    background_rate: f64,
}

fn resolve_budget(
    geometry: &GeometryBlock,
    period: PeriodSpec,
    env: &NoiseEnvironment,
    window: &FilterWindow,
    scenario: &Scenario,
) -> Result<LinkBudget, FigureError> {
    let link = geometry.resolve()?;
    let profile = scenario.turbulence_profile();
    let r0 = fried_parameter(&link, &profile, &QuadratureConfig::default());
    let efficiency = link_efficiency(
        beam_widths(&link, r0).w_lt,
        link.receiver_radius,
        geometry.eta0,
    )?;
    let background_rate = match link.direction {
        Direction::Uplink => {
            let per_nm = match period {
                PeriodSpec::Day => uplink_day_noise(env, link.receiver_radius, link.ifov),
                PeriodSpec::Night => uplink_night_noise(env, link.receiver_radius, link.ifov),
            };
            per_nm * window.bandwidth_nm
        }
        Direction::Downlink => {
            downlink_noise_power(
                env,
                fov_solid_angle(link.ifov),
                link.receiver_radius,
                window.bandwidth_nm * 1e-3,
                link.wavelength,
            )
            .photon_rate
        }
    };
    Ok(LinkBudget {
        efficiency,
        background_rate,
    })
}

fn link_snr(
    budget: &LinkBudget,
    params: &ProtocolParams,
    window: &FilterWindow,
) -> Result<SnrReport, FigureError> {
    let signal_rate = params.rep_rate * params.mu * budget.efficiency.eta;
    Ok(snr(
        signal_rate,
        budget.background_rate,
        params.dark_rate,
        window,
    )?)
}

fn geometry_meta(g: &GeometryBlock) -> Value {
    json!({
        "wavelength_nm": g.wavelength_nm,
        "direction": match g.direction {
            crate::scenario::DirectionSpec::Uplink => "uplink",
            crate::scenario::DirectionSpec::Downlink => "downlink",
        },
        "tx_aperture_m": g.tx_aperture_m,
        "receiver_radius_m": g.receiver_radius_m,
        "ifov_rad": g.ifov_rad,
        "eta0": g.eta0,
    })
}

pub fn run_figure(figure: FigureId, scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    match figure {
        FigureId::Fig1 => fig1_attenuation(scenario),
        FigureId::Fig2 => fig2_wander_ratio(scenario),
        FigureId::Fig4 => fig4_background(scenario),
        FigureId::Fig5 => fig5_uplink_snr(scenario),
        FigureId::Fig6 => fig6_downlink_snr(scenario),
        FigureId::Fig7 => fig7_sync_drift(scenario),
        FigureId::Fig10 => fig10_probe_qber(scenario),
        FigureId::Fig11 => fig11_stokes_histogram(scenario),
        FigureId::Fig12 => fig12_multiplex_qber(scenario),
        FigureId::Fig13 => fig13_weak_pulse_rates(scenario),
        FigureId::Fig14 => fig14_decoy_rate(scenario),
        FigureId::Fig15 => fig15_topologies(scenario),
    }
}

fn fig1_attenuation(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let lengths = scenario.sweep_axis("path_length_km")?;
    let radii = scenario.sweep_axis("receiver_radius_m")?;
    let base = scenario.geometry()?.clone();
    let mut rows = Vec::new();
    for &l_km in &lengths {
        for &radius in &radii {
            let mut g = base.clone();
            g.path_length_km = l_km;
            g.receiver_radius_m = radius;
            let budget = resolve_budget(
                &g,
                scenario.noise.period,
                &scenario.noise_environment()?,
                &scenario.filter_window()?,
                scenario,
            )?;
            rows.push(vec![
                num("L_km", l_km)?,
                num("receiver_radius_m", radius)?,
                num("eta", budget.efficiency.eta)?,
                num("attenuation_db", budget.efficiency.attenuation_db)?,
            ]);
        }
    }
    Ok(FigureOutput {
        columns: vec!["L_km", "receiver_radius_m", "eta", "attenuation_db"],
        rows,
        meta: base_meta("fig1", scenario, geometry_meta(&base)),
    })
}

fn fig2_wander_ratio(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let lengths = scenario.sweep_axis("path_length_km")?;
    let base = scenario.geometry()?.clone();
    let profile = scenario.turbulence_profile();
    let mut rows = Vec::new();
    for &l_km in &lengths {
        let mut g = base.clone();
        g.path_length_km = l_km;
        let link = g.resolve()?;
        let r0 = fried_parameter(&link, &profile, &QuadratureConfig::default());
        let widths = beam_widths(&link, r0);
        rows.push(vec![
            num("L_km", l_km)?,
            num("beta2_m2", widths.beta_sq)?,
            num("ratio", widths.wander_ratio())?,
        ]);
    }
    Ok(FigureOutput {
        columns: vec!["L_km", "beta2_m2", "ratio"],
        rows,
        meta: base_meta("fig2", scenario, geometry_meta(&base)),
    })
}

fn fig4_background(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let ifovs = scenario.sweep_axis("ifov_rad")?;
    let g = scenario.geometry()?;
    let env = scenario.noise_environment()?;
    let window = scenario.filter_window()?;
    let r = g.receiver_radius_m;
    let per_gate = window.bandwidth_nm * window.gate;
    let mut rows = Vec::new();
    for &ifov in &ifovs {
        let day = uplink_day_noise(&env, r, ifov);
        let night = uplink_night_noise(&env, r, ifov);
        rows.push(vec![
            num("ifov_rad", ifov)?,
            num("n_day_per_s_nm", day)?,
            num("n_night_per_s_nm", night)?,
            num("n_day_per_gate", day * per_gate)?,
            num("n_night_per_gate", night * per_gate)?,
        ]);
    }
    Ok(FigureOutput {
        columns: vec![
            "ifov_rad",
            "n_day_per_s_nm",
            "n_night_per_s_nm",
            "n_day_per_gate",
            "n_night_per_gate",
        ],
        rows,
        meta: base_meta(
            "fig4",
            scenario,
            json!({
                "receiver_radius_m": r,
                "bandwidth_nm": window.bandwidth_nm,
                "gate_s": window.gate,
                "h_sun": env.h_sun,
                "moon_factor": crate::radiometry::moon_factor(&env),
            }),
        ),
    })
}

fn fig5_uplink_snr(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let ifovs = scenario.sweep_axis("ifov_rad")?;
    let lengths = scenario.sweep_axis("path_length_km")?;
    let base = scenario.geometry()?.clone();
    let env = scenario.noise_environment()?;
    let window = scenario.filter_window()?;
    let params = scenario.protocol_params()?;
    let mut rows = Vec::new();
    for &ifov in &ifovs {
        for &l_km in &lengths {
            let mut g = base.clone();
            g.ifov_rad = ifov;
            g.path_length_km = l_km;
            let day = resolve_budget(&g, PeriodSpec::Day, &env, &window, scenario)?;
            let night = resolve_budget(&g, PeriodSpec::Night, &env, &window, scenario)?;
            let snr_day = link_snr(&day, &params, &window)?;
            let snr_night = link_snr(&night, &params, &window)?;
            rows.push(vec![
                num("ifov_rad", ifov)?,
                num("L_km", l_km)?,
                num("eta", day.efficiency.eta)?,
                num("snr_day_db", snr_day.snr_db)?,
                num("snr_night_db", snr_night.snr_db)?,
            ]);
        }
    }
    Ok(FigureOutput {
        columns: vec!["ifov_rad", "L_km", "eta", "snr_day_db", "snr_night_db"],
        rows,
        meta: merge_meta(
            base_meta("fig5", scenario, geometry_meta(&base)),
            json!({
                "bandwidth_nm": window.bandwidth_nm,
                "gate_s": window.gate,
                "mu": params.mu,
                "rep_rate_hz": params.rep_rate,
                "dark_rate_hz": params.dark_rate,
            }),
        ),
    })
}

fn fig6_downlink_snr(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let radiances = scenario.sweep_axis("sky_radiance_w_m2_sr_um")?;
    let lengths = scenario.sweep_axis("path_length_km")?;
    let base = scenario.geometry()?.clone();
    let window = scenario.filter_window()?;
    let params = scenario.protocol_params()?;
    let mut rows = Vec::new();
    for &radiance in &radiances {
        let mut noise = scenario.noise.clone();
        noise.sky = crate::scenario::SkySpec::Radiance(radiance);
        let env = noise.resolve()?;
        for &l_km in &lengths {
            let mut g = base.clone();
            g.path_length_km = l_km;
            let budget = resolve_budget(&g, noise.period, &env, &window, scenario)?;
            let report = link_snr(&budget, &params, &window)?;
            rows.push(vec![
                num("sky_radiance_w_m2_sr_um", radiance)?,
                num("L_km", l_km)?,
                num("eta", budget.efficiency.eta)?,
                num("snr", report.snr)?,
                num("snr_db", report.snr_db)?,
            ]);
        }
    }
    Ok(FigureOutput {
        columns: vec![
            "sky_radiance_w_m2_sr_um",
            "L_km",
            "eta",
            "snr",
            "snr_db",
        ],
        rows,
        meta: merge_meta(
            base_meta("fig6", scenario, geometry_meta(&base)),
            json!({
                "bandwidth_nm": window.bandwidth_nm,
                "gate_s": window.gate,
                "mu": params.mu,
                "rep_rate_hz": params.rep_rate,
                "dark_rate_hz": params.dark_rate,
            }),
        ),
    })
}

fn fig7_sync_drift(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let sync = &scenario.sync;
    let series = synthesize_pass(
        sync.altitude_km * 1e3,
        sync.step_s,
        sync.min_elevation_deg.to_radians(),
    )?;
    let stats = drift_statistics(&series, sync.histogram_bins)?;
    let rate = required_sync_rate(stats.max_abs, sync.accuracy_ns * 1e-9)?;
    let epochs = series.epochs();
    let taus = series.trip_times();
    let mut rows = Vec::new();
    for i in 0..series.len() {
        rows.push(vec![
            num("t_s", epochs[i])?,
            num("tau_s", taus[i])?,
            num("dtau_dt", stats.dtau_dt[i])?,
        ]);
    }
    Ok(FigureOutput {
        columns: vec!["t_s", "tau_s", "dtau_dt"],
        rows,
        meta: merge_meta(
            base_meta(
                "fig7",
                scenario,
                json!({
                    "altitude_km": sync.altitude_km,
                    "step_s": sync.step_s,
                    "min_elevation_deg": sync.min_elevation_deg,
                    "accuracy_ns": sync.accuracy_ns,
                    "convention": "two-way: tau = 2 range / c",
                }),
            ),
            json!({
                "max_abs_dtau_dt": stats.max_abs,
                "range_rate_one_way_m_s": stats.range_rate_one_way,
                "range_rate_two_way_m_s": stats.range_rate_two_way,
                "required_sync_rate_hz": rate.base,
                "sync_rate_margin_hz": [rate.margin_low, rate.margin_high],
                "samples": stats.samples,
            }),
        ),
    })
}

fn pass_meta(scenario: &Scenario) -> Value {
    let p = &scenario.pass;
    json!({
        "altitude_km": p.altitude_km,
        "step_s": p.step_s,
        "min_elevation_deg": p.min_elevation_deg,
        "ensemble_size": p.ensemble_size,
        "tracking_mirrors": p.tracking_mirrors,
    })
}

fn fig10_probe_qber(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let probes = scenario.sweep_axis("probe_wavelength_nm")?;
    let signal = scenario
        .geometry
        .clone()
        .unwrap_or_default()
        .wavelength();
    let model = scenario.pass_model()?;
    let passes = model.draw_ensemble(scenario.pass.ensemble_size, scenario.seed)?;
    let mut rows = Vec::new();
    for &probe_nm in &probes {
        let qber = probe_wavelength_qber(
            &passes,
            &model.mirror,
            model.step,
            signal,
            probe_nm * 1e-9,
        )?;
        rows.push(vec![num("probe_wavelength_nm", probe_nm)?, num("qber", qber)?]);
    }
    Ok(FigureOutput {
        columns: vec!["probe_wavelength_nm", "qber"],
        rows,
        meta: merge_meta(
            base_meta("fig10", scenario, pass_meta(scenario)),
            json!({ "signal_wavelength_nm": signal * 1e9 }),
        ),
    })
}

fn fig11_stokes_histogram(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let altitudes = scenario.sweep_axis("altitude_km")?;
    let wavelength = scenario
        .geometry
        .clone()
        .unwrap_or_default()
        .wavelength();
    let base = scenario.pass_model()?;
    let component = scenario.pass.stokes_component.resolve();
    let input = JonesVector::vertical();
    let mut rows = Vec::new();
    let mut max_by_altitude = serde_json::Map::new();
    let mut samples_by_altitude = serde_json::Map::new();
    for &alt_km in &altitudes {
        let mut model = base.clone();
        model.altitude = alt_km * 1e3;
        let passes = model.draw_ensemble(scenario.pass.ensemble_size, scenario.seed)?;
        let stats = stokes_statistics(
            &passes,
            &model.mirror,
            wavelength,
            &input,
            model.step,
            component,
            scenario.pass.histogram_bins,
        )?;
        let key = format!("{alt_km}");
        max_by_altitude.insert(key.clone(), json!(stats.max_abs));
        samples_by_altitude.insert(key, json!(stats.samples));
        for (center, count) in stats.histogram {
            rows.push(vec![
                num("altitude_km", alt_km)?,
                num("bin_center_per_s", center)?,
                count.to_string(),
            ]);
        }
    }
    Ok(FigureOutput {
        columns: vec!["altitude_km", "bin_center_per_s", "count"],
        rows,
        meta: merge_meta(
            base_meta("fig11", scenario, pass_meta(scenario)),
            json!({
                "component": component.label(),
                "wavelength_nm": wavelength * 1e9,
                "max_abs_ds_dt": Value::Object(max_by_altitude),
                "derivative_samples": Value::Object(samples_by_altitude),
            }),
        ),
    })
}

fn fig12_multiplex_qber(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let altitudes = scenario.sweep_axis("altitude_km")?;
    let rates = scenario.sweep_axis("probe_rate_hz")?;
    let wavelength = scenario
        .geometry
        .clone()
        .unwrap_or_default()
        .wavelength();
    let base = scenario.pass_model()?;
    let mut rows = Vec::new();
    for &alt_km in &altitudes {
        let mut model = base.clone();
        model.altitude = alt_km * 1e3;
        let passes = model.draw_ensemble(scenario.pass.ensemble_size, scenario.seed)?;
        for &rate in &rates {
            let qber = time_multiplexed_qber(
                &passes,
                &model.mirror,
                wavelength,
                rate,
                scenario.pass.pulses_per_interval,
                scenario.pass.max_intervals,
            )?;
            rows.push(vec![
                num("altitude_km", alt_km)?,
                num("probe_rate_hz", rate)?,
                num("qber", qber)?,
            ]);
        }
    }
    Ok(FigureOutput {
        columns: vec!["altitude_km", "probe_rate_hz", "qber"],
        rows,
        meta: merge_meta(
            base_meta("fig12", scenario, pass_meta(scenario)),
            json!({
                "wavelength_nm": wavelength * 1e9,
                "pulses_per_interval": scenario.pass.pulses_per_interval,
                "max_intervals": scenario.pass.max_intervals,
            }),
        ),
    })
}

fn fig13_weak_pulse_rates(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let lengths = scenario.sweep_axis("path_length_km")?;
    let uplink = scenario.geometry()?.clone();
    let downlink = scenario.downlink_geometry()?.clone();
    let env = scenario.noise_environment()?;
    let window = scenario.filter_window()?;
    let params = scenario.protocol_params()?;
    let mut rows = Vec::new();
    for &l_km in &lengths {
        let mut up = uplink.clone();
        up.path_length_km = l_km;
        let mut down = downlink.clone();
        down.path_length_km = l_km;
        let up_budget = resolve_budget(&up, scenario.noise.period, &env, &window, scenario)?;
        let down_budget = resolve_budget(&down, scenario.noise.period, &env, &window, scenario)?;
        let noise_per_gate = |b: &LinkBudget| (b.background_rate + params.dark_rate) * window.gate;
        let down_rate = weak_pulse_rate(
            down_budget.efficiency.eta,
            noise_per_gate(&down_budget),
            params.mu,
            &params,
        )?;
        let (mu_star, up_rate) = optimal_weak_pulse(
            up_budget.efficiency.eta,
            noise_per_gate(&up_budget),
            &params,
        )?;
        rows.push(vec![
            num("L_km", l_km)?,
            num("downlink_rate_per_pulse", down_rate.per_pulse)?,
            num(
                "downlink_bits_per_s",
                down_rate.bits_per_second(params.rep_rate),
            )?,
            num("uplink_optimal_mu", mu_star)?,
            num("uplink_rate_per_pulse", up_rate.per_pulse)?,
            num(
                "uplink_bits_per_s",
                up_rate.bits_per_second(params.rep_rate),
            )?,
        ]);
    }
    Ok(FigureOutput {
        columns: vec![
            "L_km",
            "downlink_rate_per_pulse",
            "downlink_bits_per_s",
            "uplink_optimal_mu",
            "uplink_rate_per_pulse",
            "uplink_bits_per_s",
        ],
        rows,
        meta: merge_meta(
            base_meta(
                "fig13",
                scenario,
                json!({
                    "uplink": geometry_meta(&uplink),
                    "downlink": geometry_meta(&downlink),
                    "mu_downlink": params.mu,
                    "rep_rate_hz": params.rep_rate,
                    "dark_rate_hz": params.dark_rate,
                    "error_correction": params.error_correction,
                }),
            ),
            json!({ "asymptotic_regime_assumed": true }),
        ),
    })
}

fn fig14_decoy_rate(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let lengths = scenario.sweep_axis("path_length_km")?;
    let base = scenario.geometry()?.clone();
    let env = scenario.noise_environment()?;
    let window = scenario.filter_window()?;
    let params = scenario.protocol_params()?;
    let mut rows = Vec::new();
    for &l_km in &lengths {
        let mut g = base.clone();
        g.path_length_km = l_km;
        let budget = resolve_budget(&g, scenario.noise.period, &env, &window, scenario)?;
        let noise_per_gate = (budget.background_rate + params.dark_rate) * window.gate;
        let op = operating_point(budget.efficiency.eta, noise_per_gate, &params)?;
        let rate = decoy_rate(budget.efficiency.eta, noise_per_gate, &params)?;
        rows.push(vec![
            num("L_km", l_km)?,
            num("eta", budget.efficiency.eta)?,
            num("qber", op.qber)?,
            num("rate_per_pulse", rate.per_pulse)?,
            num("bits_per_s", rate.bits_per_second(params.rep_rate))?,
        ]);
    }
    Ok(FigureOutput {
        columns: vec!["L_km", "eta", "qber", "rate_per_pulse", "bits_per_s"],
        rows,
        meta: merge_meta(
            base_meta(
                "fig14",
                scenario,
                json!({
                    "geometry": geometry_meta(&base),
                    "mu": params.mu,
                    "mu_prime": params.mu_prime,
                    "rep_rate_hz": params.rep_rate,
                    "dark_rate_hz": params.dark_rate,
                }),
            ),
            json!({ "asymptotic_regime_assumed": true }),
        ),
    })
}

fn fig15_topologies(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let uplink = scenario.geometry()?.clone();
    let downlink = scenario.downlink_geometry()?.clone();
    let env = scenario.noise_environment()?;
    let window = scenario.filter_window()?;
    let params = scenario.protocol_params()?;
    let up_budget = resolve_budget(&uplink, scenario.noise.period, &env, &window, scenario)?;
    let down_budget = resolve_budget(&downlink, scenario.noise.period, &env, &window, scenario)?;
    let local = ArmParams {
        efficiency: params.local_efficiency,
        noise_rate: params.dark_rate,
        dark_rate: params.dark_rate,
    };
    let up_arm = ArmParams {
        efficiency: up_budget.efficiency.eta,
        noise_rate: up_budget.background_rate,
        dark_rate: params.dark_rate,
    };
    let down_arm = ArmParams {
        efficiency: down_budget.efficiency.eta,
        noise_rate: down_budget.background_rate,
        dark_rate: params.dark_rate,
    };
    let mut rows = Vec::new();
    for topology in Topology::ALL {
        let (arm1, arm2) = topology_arms(topology, &local, &up_arm, &down_arm);
        let budget = entanglement_snr(params.pair_rate, window.gate, &arm1, &arm2)?;
        rows.push(vec![
            topology.label().to_string(),
            num("coincidence_rate_per_s", budget.coincidence_rate)?,
            num("accidental_rate_per_s", budget.accidental_rate)?,
            num("snr", budget.snr)?,
            num("snr_db", budget.snr_db)?,
            num("visibility", budget.visibility)?,
            flag(budget.feasible),
        ]);
    }
    Ok(FigureOutput {
        columns: vec![
            "topology",
            "coincidence_rate_per_s",
            "accidental_rate_per_s",
            "snr",
            "snr_db",
            "visibility",
            "feasible",
        ],
        rows,
        meta: merge_meta(
            base_meta(
                "fig15",
                scenario,
                json!({
                    "uplink": geometry_meta(&uplink),
                    "downlink": geometry_meta(&downlink),
                    "pair_rate_hz": params.pair_rate,
                    "gate_s": window.gate,
                    "local_efficiency": params.local_efficiency,
                    "dark_rate_hz": params.dark_rate,
                }),
            ),
            json!({ "asymptotic_regime_assumed": true }),
        ),
    })
}

// ---- Generic sweeps ----

/// Cartesian sweep of the scenario's declared quantity over its axes.
/// Rows are ordered lexicographically in the axis declaration order; the
/// first axis varies slowest.
pub fn sweep(scenario: &Scenario) -> Result<FigureOutput, FigureError> {
    let block = scenario
        .sweep
        .as_ref()
        .ok_or(ScenarioError::MissingBlock("sweep"))?;
    let quantity = block.quantity.ok_or_else(|| {
        ScenarioError::Invalid("sweep block declares no quantity to evaluate".into())
    })?;
    let grids: Vec<Vec<f64>> = block
        .axes
        .iter()
        .map(|a| a.expand())
        .collect::<Result<_, _>>()?;
    let value_columns: Vec<&'static str> = match quantity {
        SweepQuantity::Attenuation => vec!["eta", "attenuation_db"],
        SweepQuantity::Snr => vec!["eta", "snr", "snr_db"],
        SweepQuantity::Qber => vec!["qber"],
        SweepQuantity::Keyrate => vec!["eta", "qber", "rate_per_pulse", "bits_per_s"],
    };
    let mut columns: Vec<&'static str> = Vec::new();
    for axis in &block.axes {
        let name = crate::scenario::SWEEP_AXES
            .iter()
            .find(|&&n| n == axis.name)
            .expect("validated axis name");
        columns.push(name);
    }
    columns.extend_from_slice(&value_columns);

    let total: usize = grids.iter().map(|g| g.len()).product();
    let mut rows = Vec::with_capacity(total);
    for flat in 0..total {
        // Mixed-radix decomposition, first axis slowest.
        let mut rem = flat;
        let mut indices = vec![0usize; grids.len()];
        for k in (0..grids.len()).rev() {
            indices[k] = rem % grids[k].len();
            rem /= grids[k].len();
        }
        let mut point = scenario.clone();
        let mut row = Vec::with_capacity(columns.len());
        for (k, axis) in block.axes.iter().enumerate() {
            let value = grids[k][indices[k]];
            point.apply_axis(&axis.name, value)?;
            row.push(num("axis", value)?);
        }
        evaluate_quantity(quantity, &point, &mut row)?;
        rows.push(row);
    }
    Ok(FigureOutput {
        columns,
        rows,
        meta: merge_meta(
            base_meta(
                "sweep",
                scenario,
                json!({
                    "quantity": match quantity {
                        SweepQuantity::Attenuation => "attenuation",
                        SweepQuantity::Snr => "snr",
                        SweepQuantity::Qber => "qber",
                        SweepQuantity::Keyrate => "keyrate",
                    },
                    "axes": block.axes.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
                    "grid_points": total,
                }),
            ),
            if matches!(quantity, SweepQuantity::Keyrate) {
                json!({ "asymptotic_regime_assumed": true })
            } else {
                json!({})
            },
        ),
    })
}

fn evaluate_quantity(
    quantity: SweepQuantity,
    point: &Scenario,
    row: &mut Vec<String>,
) -> Result<(), FigureError> {
    match quantity {
        SweepQuantity::Attenuation => {
            let g = point.geometry()?;
            let budget = resolve_budget(
                g,
                point.noise.period,
                &point.noise_environment()?,
                &point.filter_window()?,
                point,
            )?;
            row.push(num("eta", budget.efficiency.eta)?);
            row.push(num("attenuation_db", budget.efficiency.attenuation_db)?);
        }
        SweepQuantity::Snr => {
            let g = point.geometry()?;
            let window = point.filter_window()?;
            let params = point.protocol_params()?;
            let budget =
                resolve_budget(g, point.noise.period, &point.noise_environment()?, &window, point)?;
            let report = link_snr(&budget, &params, &window)?;
            row.push(num("eta", budget.efficiency.eta)?);
            row.push(num("snr", report.snr)?);
            row.push(num("snr_db", report.snr_db)?);
        }
        SweepQuantity::Qber => {
            let wavelength = point.geometry.clone().unwrap_or_default().wavelength();
            let model = point.pass_model()?;
            let passes = model.draw_ensemble(point.pass.ensemble_size, point.seed)?;
            let qber = match point.pass.scheme {
                SchemeSpec::ProbeWavelength => {
                    let probe = point
                        .pass
                        .probe_wavelength_nm
                        .map(|nm| nm * 1e-9)
                        .unwrap_or(wavelength);
                    probe_wavelength_qber(&passes, &model.mirror, model.step, wavelength, probe)?
                }
                SchemeSpec::TimeMultiplexed => time_multiplexed_qber(
                    &passes,
                    &model.mirror,
                    wavelength,
                    point.pass.probe_rate_hz,
                    point.pass.pulses_per_interval,
                    point.pass.max_intervals,
                )?,
            };
            row.push(num("qber", qber)?);
        }
        SweepQuantity::Keyrate => {
            let g = point.geometry()?;
            let window = point.filter_window()?;
            let params = point.protocol_params()?;
            let budget =
                resolve_budget(g, point.noise.period, &point.noise_environment()?, &window, point)?;
            let noise_per_gate = (budget.background_rate + params.dark_rate) * window.gate;
            let op = operating_point(budget.efficiency.eta, noise_per_gate, &params)?;
            let rate = match point.protocol.rate_model {
                RateModel::Bb84Ideal => bb84_ideal_rate(&op, &params)?,
                RateModel::Gllp => {
                    weak_pulse_rate(budget.efficiency.eta, noise_per_gate, params.mu, &params)?
                }
                RateModel::Decoy => decoy_rate(budget.efficiency.eta, noise_per_gate, &params)?,
            };
            row.push(num("eta", budget.efficiency.eta)?);
            row.push(num("qber", op.qber)?);
            row.push(num("rate_per_pulse", rate.per_pulse)?);
            row.push(num("bits_per_s", rate.bits_per_second(params.rep_rate))?);
        }
    }
    Ok(())
}
