//! Scenario documents: the JSON configuration that drives figures and
//! sweeps.
//!
//! A scenario groups every tunable of the simulation into named blocks
//! (geometry, turbulence, noise, filter, protocol, pass, sync) plus an
//! optional sweep section. Parsing is strict: unknown keys are rejected
//! with the JSON path of the offender, every block is validated against
//! the owning module's constructors, and sweep axes must reference the
//! fixed set of sweepable parameter names.

use crate::atmosphere::{Direction, LinkGeometry, TurbulenceProfile};
use crate::keyrate::ProtocolParams;
use crate::polarization::{
    aluminum_like, MirrorModel, PassModel, RefractiveIndexTable, StokesComponent,
};
use crate::radiometry::{FilterWindow, NoiseEnvironment};
use num_complex::Complex64;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario is missing the `{0}` block required here")]
    MissingBlock(&'static str),
    #[error("unknown sweep axis {name:?}; sweepable parameters: {}", SWEEP_AXES.join(", "))]
    UnknownAxis { name: String },
    #[error("this run requires a sweep axis named {0:?}")]
    MissingAxis(&'static str),
}

/// Parameter names a sweep axis may reference.
pub const SWEEP_AXES: &[&str] = &[
    "path_length_km",
    "receiver_radius_m",
    "ifov_rad",
    "wavelength_nm",
    "sky_radiance_w_m2_sr_um",
    "probe_wavelength_nm",
    "probe_rate_hz",
    "altitude_km",
    "mu",
];

fn d_wavelength_nm() -> f64 {
    800.0
}
fn d_tx_aperture_m() -> f64 {
    1.5
}
fn d_path_length_km() -> f64 {
    500.0
}
fn d_receiver_radius_m() -> f64 {
    0.5
}
fn d_ifov_rad() -> f64 {
    1e-5
}
fn d_eta0() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSpec {
    Uplink,
    Downlink,
}

impl Default for DirectionSpec {
    fn default() -> Self {
        DirectionSpec::Uplink
    }
}

/// Link geometry block; defaults describe the reference 500 km uplink with
/// a 1.5 m ground transmitter.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryBlock {
    pub wavelength_nm: f64,
    pub direction: DirectionSpec,
    /// Transmitter aperture diameter, m.
    pub tx_aperture_m: f64,
    pub path_length_km: f64,
    pub ground_altitude_m: f64,
    pub receiver_radius_m: f64,
    pub ifov_rad: f64,
    /// Peak collection efficiency of the receive telescope.
    pub eta0: f64,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        GeometryBlock {
            wavelength_nm: d_wavelength_nm(),
            direction: DirectionSpec::default(),
            tx_aperture_m: d_tx_aperture_m(),
            path_length_km: d_path_length_km(),
            ground_altitude_m: 0.0,
            receiver_radius_m: d_receiver_radius_m(),
            ifov_rad: d_ifov_rad(),
            eta0: d_eta0(),
        }
    }
}

impl GeometryBlock {
    pub fn wavelength(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    pub fn resolve(&self) -> Result<LinkGeometry, ScenarioError> {
        let direction = match self.direction {
            DirectionSpec::Uplink => Direction::Uplink,
            DirectionSpec::Downlink => Direction::Downlink,
        };
        LinkGeometry::new(
            self.wavelength(),
            self.tx_aperture_m,
            self.path_length_km * 1e3,
            direction,
        )
        .and_then(|g| g.with_ground_altitude(self.ground_altitude_m))
        .and_then(|g| g.with_receiver_radius(self.receiver_radius_m))
        .and_then(|g| g.with_ifov(self.ifov_rad))
        .map_err(|e| ScenarioError::Invalid(format!("geometry: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbulenceBlock {
    pub a_coefficient: f64,
    pub wind_speed_m_s: f64,
}

impl Default for TurbulenceBlock {
    fn default() -> Self {
        let p = TurbulenceProfile::default();
        TurbulenceBlock {
            a_coefficient: p.a_coefficient,
            wind_speed_m_s: p.wind_speed,
        }
    }
}

impl TurbulenceBlock {
    pub fn resolve(&self) -> TurbulenceProfile {
        TurbulenceProfile {
            a_coefficient: self.a_coefficient,
            wind_speed: self.wind_speed_m_s,
        }
    }
}

/// Sky radiance: either a named condition or a direct value in
/// W m^-2 sr^-1 um^-1.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SkySpec {
    Named(String),
    Radiance(f64),
}

impl Default for SkySpec {
    fn default() -> Self {
        SkySpec::Named("new_moon".into())
    }
}

impl SkySpec {
    pub fn radiance(&self) -> Result<f64, ScenarioError> {
        match self {
            SkySpec::Radiance(v) => Ok(*v),
            SkySpec::Named(name) => match name.as_str() {
                "day" => Ok(20.0),
                "full_moon" => Ok(1.5e-3),
                "new_moon" => Ok(1.5e-5),
                other => Err(ScenarioError::Invalid(format!(
                    "unknown sky condition {other:?}; use day, full_moon, new_moon, or a radiance value"
                ))),
            },
        }
    }
}

/// Time of day governing which uplink background model applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodSpec {
    Day,
    Night,
}

impl Default for PeriodSpec {
    fn default() -> Self {
        PeriodSpec::Night
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseBlock {
    pub h_sun: f64,
    pub a_earth: f64,
    pub a_moon: f64,
    pub r_moon_m: f64,
    pub d_earth_moon_m: f64,
    pub temperature_k: f64,
    pub sky: SkySpec,
    pub period: PeriodSpec,
}

impl Default for NoiseBlock {
    fn default() -> Self {
        let env = NoiseEnvironment::default();
        NoiseBlock {
            h_sun: env.h_sun,
            a_earth: env.a_earth,
            a_moon: env.a_moon,
            r_moon_m: env.r_moon,
            d_earth_moon_m: env.d_earth_moon,
            temperature_k: env.temperature,
            sky: SkySpec::default(),
            period: PeriodSpec::default(),
        }
    }
}

impl NoiseBlock {
    pub fn resolve(&self) -> Result<NoiseEnvironment, ScenarioError> {
        let env = NoiseEnvironment {
            h_sun: self.h_sun,
            a_earth: self.a_earth,
            a_moon: self.a_moon,
            r_moon: self.r_moon_m,
            d_earth_moon: self.d_earth_moon_m,
            temperature: self.temperature_k,
            sky_radiance: self.sky.radiance()?,
        };
        env.validate()
            .map_err(|e| ScenarioError::Invalid(format!("noise: {e}")))?;
        Ok(env)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterBlock {
    pub bandwidth_nm: f64,
    pub gate_ns: f64,
}

impl Default for FilterBlock {
    fn default() -> Self {
        let w = FilterWindow::default();
        FilterBlock {
            bandwidth_nm: w.bandwidth_nm,
            gate_ns: w.gate * 1e9,
        }
    }
}

impl FilterBlock {
    pub fn resolve(&self) -> Result<FilterWindow, ScenarioError> {
        let w = FilterWindow {
            bandwidth_nm: self.bandwidth_nm,
            gate: self.gate_ns * 1e-9,
        };
        w.validate()
            .map_err(|e| ScenarioError::Invalid(format!("filter: {e}")))?;
        Ok(w)
    }
}

/// Which key-rate analysis a generic `keyrate` sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    Bb84Ideal,
    Gllp,
    Decoy,
}

impl Default for RateModel {
    fn default() -> Self {
        RateModel::Gllp
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolBlock {
    pub mu: f64,
    pub mu_prime: f64,
    pub error_correction: f64,
    pub e_opt: f64,
    pub rep_rate_hz: f64,
    pub pair_rate_hz: f64,
    pub dark_rate_hz: f64,
    pub local_efficiency: f64,
    pub rate_model: RateModel,
}

impl Default for ProtocolBlock {
    fn default() -> Self {
        let p = ProtocolParams::default();
        ProtocolBlock {
            mu: p.mu,
            mu_prime: p.mu_prime,
            error_correction: p.error_correction,
            e_opt: p.e_opt,
            rep_rate_hz: p.rep_rate,
            pair_rate_hz: p.pair_rate,
            dark_rate_hz: p.dark_rate,
            local_efficiency: p.local_efficiency,
            rate_model: RateModel::default(),
        }
    }
}

impl ProtocolBlock {
    pub fn resolve(&self) -> Result<ProtocolParams, ScenarioError> {
        let p = ProtocolParams {
            mu: self.mu,
            mu_prime: self.mu_prime,
            error_correction: self.error_correction,
            e_opt: self.e_opt,
            rep_rate: self.rep_rate_hz,
            pair_rate: self.pair_rate_hz,
            dark_rate: self.dark_rate_hz,
            local_efficiency: self.local_efficiency,
        };
        p.validate()
            .map_err(|e| ScenarioError::Invalid(format!("protocol: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct IndexTableSpec {
    pub wavelength_nm: Vec<f64>,
    pub n: Vec<f64>,
    pub k: Vec<f64>,
}

/// Mirror coating: a named builtin, an index-table file, or an inline
/// table.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MirrorSpec {
    Named(String),
    Detailed(MirrorDetail),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorDetail {
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub table: Option<IndexTableSpec>,
}

impl Default for MirrorSpec {
    fn default() -> Self {
        MirrorSpec::Named("aluminum".into())
    }
}

impl MirrorSpec {
    pub fn resolve(&self, base_dir: &Path) -> Result<MirrorModel, ScenarioError> {
        match self {
            MirrorSpec::Named(name) => match name.as_str() {
                "ideal" => Ok(MirrorModel::Ideal),
                "aluminum" => Ok(MirrorModel::Metallic(aluminum_like())),
                other => Err(ScenarioError::Invalid(format!(
                    "unknown mirror {other:?}; use \"ideal\", \"aluminum\", {{\"file\": ...}} or {{\"table\": ...}}"
                ))),
            },
            MirrorSpec::Detailed(detail) => match (&detail.file, &detail.table) {
                (Some(path), None) => {
                    let full = if path.is_absolute() {
                        path.clone()
                    } else {
                        base_dir.join(path)
                    };
                    let text = std::fs::read_to_string(&full)?;
                    let table = RefractiveIndexTable::parse(&text).map_err(|e| {
                        ScenarioError::Invalid(format!("mirror table {}: {e}", full.display()))
                    })?;
                    Ok(MirrorModel::Metallic(table))
                }
                (None, Some(spec)) => {
                    if spec.n.len() != spec.k.len() {
                        return Err(ScenarioError::Invalid(format!(
                            "mirror table: n has {} samples but k has {}",
                            spec.n.len(),
                            spec.k.len()
                        )));
                    }
                    let indices = spec
                        .n
                        .iter()
                        .zip(&spec.k)
                        .map(|(&re, &im)| Complex64::new(re, im))
                        .collect();
                    let table = RefractiveIndexTable::new(spec.wavelength_nm.clone(), indices)
                        .map_err(|e| ScenarioError::Invalid(format!("mirror table: {e}")))?;
                    Ok(MirrorModel::Metallic(table))
                }
                _ => Err(ScenarioError::Invalid(
                    "mirror needs exactly one of \"file\" or \"table\"".into(),
                )),
            },
        }
    }
}

/// Which compensation scheme a `qber` sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    ProbeWavelength,
    TimeMultiplexed,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        SchemeSpec::ProbeWavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentSpec {
    S1,
    S2,
    S3,
}

impl ComponentSpec {
    pub fn resolve(self) -> StokesComponent {
        match self {
            ComponentSpec::S1 => StokesComponent::S1,
            ComponentSpec::S2 => StokesComponent::S2,
            ComponentSpec::S3 => StokesComponent::S3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PassBlock {
    pub altitude_km: f64,
    pub step_s: f64,
    pub min_elevation_deg: f64,
    pub ensemble_size: usize,
    pub mirror: MirrorSpec,
    pub tracking_mirrors: usize,
    pub scheme: SchemeSpec,
    /// Probe wavelength for the probe-wavelength scheme; defaults to the
    /// signal wavelength.
    pub probe_wavelength_nm: Option<f64>,
    pub probe_rate_hz: f64,
    pub pulses_per_interval: usize,
    /// Probe intervals evaluated per pass before stride subsampling.
    pub max_intervals: usize,
    pub stokes_component: ComponentSpec,
    pub histogram_bins: usize,
}

impl Default for PassBlock {
    fn default() -> Self {
        PassBlock {
            altitude_km: 500.0,
            step_s: 1.0,
            min_elevation_deg: 10.0,
            ensemble_size: 1000,
            mirror: MirrorSpec::default(),
            tracking_mirrors: 2,
            scheme: SchemeSpec::default(),
            probe_wavelength_nm: None,
            probe_rate_hz: 1.0,
            pulses_per_interval: 8,
            max_intervals: 256,
            stokes_component: ComponentSpec::S2,
            histogram_bins: 41,
        }
    }
}

impl PassBlock {
    pub fn resolve(&self, base_dir: &Path) -> Result<PassModel, ScenarioError> {
        let model = PassModel {
            altitude: self.altitude_km * 1e3,
            step: self.step_s,
            min_elevation: self.min_elevation_deg.to_radians(),
            mirror: self.mirror.resolve(base_dir)?,
            tracking_mirrors: self.tracking_mirrors,
        };
        model
            .validate()
            .map_err(|e| ScenarioError::Invalid(format!("pass: {e}")))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyncBlock {
    pub altitude_km: f64,
    pub step_s: f64,
    pub min_elevation_deg: f64,
    pub accuracy_ns: f64,
    pub histogram_bins: usize,
}

impl Default for SyncBlock {
    fn default() -> Self {
        SyncBlock {
            altitude_km: 400.0,
            step_s: 1.0,
            min_elevation_deg: 10.0,
            accuracy_ns: 1.0,
            histogram_bins: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing::Linear
    }
}

/// One sweep dimension: either an explicit value list or a range with a
/// point count, never both.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl SweepAxis {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !SWEEP_AXES.contains(&self.name.as_str()) {
            return Err(ScenarioError::UnknownAxis {
                name: self.name.clone(),
            });
        }
        let range_parts = [self.from.is_some(), self.to.is_some(), self.steps.is_some()];
        match (&self.values, range_parts.iter().any(|&p| p)) {
            (Some(_), true) => Err(ScenarioError::Invalid(format!(
                "axis {:?}: give either values or from/to/steps, not both",
                self.name
            ))),
            (Some(values), false) => {
                if values.is_empty() {
                    return Err(ScenarioError::Invalid(format!(
                        "axis {:?}: values must be non-empty",
                        self.name
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(ScenarioError::Invalid(format!(
                        "axis {:?}: values must be finite",
                        self.name
                    )));
                }
                Ok(())
            }
            (None, _) => {
                let (from, to, steps) = match (self.from, self.to, self.steps) {
                    (Some(f), Some(t), Some(s)) => (f, t, s),
                    _ => {
                        return Err(ScenarioError::Invalid(format!(
                            "axis {:?}: a range needs all of from, to and steps",
                            self.name
                        )))
                    }
                };
                if !(from.is_finite() && to.is_finite() && steps >= 1) {
                    return Err(ScenarioError::Invalid(format!(
                        "axis {:?}: need finite bounds and steps >= 1",
                        self.name
                    )));
                }
                if self.spacing == Spacing::Log && !(from > 0.0 && to > 0.0) {
                    return Err(ScenarioError::Invalid(format!(
                        "axis {:?}: log spacing needs positive bounds",
                        self.name
                    )));
                }
                Ok(())
            }
        }
    }

    /// Grid points of this axis in declaration order.
    pub fn expand(&self) -> Result<Vec<f64>, ScenarioError> {
        self.validate()?;
        if let Some(values) = &self.values {
            return Ok(values.clone());
        }
        let (from, to, steps) = (
            self.from.unwrap(),
            self.to.unwrap(),
            self.steps.unwrap(),
        );
        if steps == 1 {
            return Ok(vec![from]);
        }
        let n = (steps - 1) as f64;
        Ok((0..steps)
            .map(|i| {
                let f = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => from + (to - from) * f,
                    Spacing::Log => (from.ln() + (to.ln() - from.ln()) * f).exp(),
                }
            })
            .collect())
    }
}

/// Figure- or module-level quantity a generic sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepQuantity {
    Attenuation,
    Snr,
    Qber,
    Keyrate,
}

/// Sweep section. Figures only consume the axes; the generic sweep
/// command additionally needs `quantity`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default)]
    pub quantity: Option<SweepQuantity>,
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    geometry: Option<GeometryBlock>,
    #[serde(default)]
    downlink_geometry: Option<GeometryBlock>,
    #[serde(default)]
    turbulence: TurbulenceBlock,
    #[serde(default)]
    noise: NoiseBlock,
    #[serde(default)]
    filter: FilterBlock,
    #[serde(default)]
    protocol: ProtocolBlock,
    #[serde(default)]
    pass: PassBlock,
    #[serde(default)]
    sync: SyncBlock,
    #[serde(default)]
    sweep: Option<SweepBlock>,
}

/// A fully validated scenario. Blocks keep their raw (unit-suffixed) form
/// so sweeps can mutate parameters before resolution.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Directory relative file references (mirror tables) resolve against.
    pub base_dir: PathBuf,
    pub geometry: Option<GeometryBlock>,
    pub downlink_geometry: Option<GeometryBlock>,
    pub turbulence: TurbulenceBlock,
    pub noise: NoiseBlock,
    pub filter: FilterBlock,
    pub protocol: ProtocolBlock,
    pub pass: PassBlock,
    pub sync: SyncBlock,
    pub sweep: Option<SweepBlock>,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let base_dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    parse_scenario_str(&text, base_dir)
}

pub fn parse_scenario_str(text: &str, base_dir: PathBuf) -> Result<Scenario, ScenarioError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile =
        serde_path_to_error::deserialize(&mut de).map_err(|e| ScenarioError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    let scenario = Scenario {
        name: file.name,
        seed: file.seed,
        output_dir: file.output_dir,
        base_dir,
        geometry: file.geometry,
        downlink_geometry: file.downlink_geometry,
        turbulence: file.turbulence,
        noise: file.noise,
        filter: file.filter,
        protocol: file.protocol,
        pass: file.pass,
        sync: file.sync,
        sweep: file.sweep,
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    /// Semantic validation after structural parsing: every present block
    /// must resolve, and sweep axes must be known, unique and expandable.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(ScenarioError::Invalid("name must be non-empty".into()));
        }
        if let Some(g) = &self.geometry {
            g.resolve()?;
        }
        if let Some(g) = &self.downlink_geometry {
            g.resolve()?;
        }
        self.turbulence.resolve();
        self.noise.resolve()?;
        self.filter.resolve()?;
        self.protocol.resolve()?;
        self.pass.resolve(&self.base_dir)?;
        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() {
                return Err(ScenarioError::Invalid(
                    "sweep block needs at least one axis".into(),
                ));
            }
            let mut seen = std::collections::BTreeSet::new();
            for axis in &sweep.axes {
                axis.validate()?;
                if !seen.insert(axis.name.as_str()) {
                    return Err(ScenarioError::Invalid(format!(
                        "duplicate sweep axis {:?}",
                        axis.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<&GeometryBlock, ScenarioError> {
        self.geometry
            .as_ref()
            .ok_or(ScenarioError::MissingBlock("geometry"))
    }

    pub fn downlink_geometry(&self) -> Result<&GeometryBlock, ScenarioError> {
        self.downlink_geometry
            .as_ref()
            .ok_or(ScenarioError::MissingBlock("downlink_geometry"))
    }

    pub fn turbulence_profile(&self) -> TurbulenceProfile {
        self.turbulence.resolve()
    }

    pub fn noise_environment(&self) -> Result<NoiseEnvironment, ScenarioError> {
        self.noise.resolve()
    }

    pub fn filter_window(&self) -> Result<FilterWindow, ScenarioError> {
        self.filter.resolve()
    }

    pub fn protocol_params(&self) -> Result<ProtocolParams, ScenarioError> {
        self.protocol.resolve()
    }

    pub fn pass_model(&self) -> Result<PassModel, ScenarioError> {
        self.pass.resolve(&self.base_dir)
    }

    /// Expanded grid of the sweep axis with the given name.
    pub fn sweep_axis(&self, name: &'static str) -> Result<Vec<f64>, ScenarioError> {
        self.sweep
            .as_ref()
            .and_then(|s| s.axes.iter().find(|a| a.name == name))
            .ok_or(ScenarioError::MissingAxis(name))?
            .expand()
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.sweep
            .as_ref()
            .is_some_and(|s| s.axes.iter().any(|a| a.name == name))
    }

    /// Applies one sweep-axis value onto the owning block.
    pub fn apply_axis(&mut self, name: &str, value: f64) -> Result<(), ScenarioError> {
        fn geometry(s: &mut Scenario) -> Result<&mut GeometryBlock, ScenarioError> {
            s.geometry
                .as_mut()
                .ok_or(ScenarioError::MissingBlock("geometry"))
        }
        match name {
            "path_length_km" => geometry(self)?.path_length_km = value,
            "receiver_radius_m" => geometry(self)?.receiver_radius_m = value,
            "ifov_rad" => geometry(self)?.ifov_rad = value,
            "wavelength_nm" => geometry(self)?.wavelength_nm = value,
            "sky_radiance_w_m2_sr_um" => self.noise.sky = SkySpec::Radiance(value),
            "probe_wavelength_nm" => self.pass.probe_wavelength_nm = Some(value),
            "probe_rate_hz" => self.pass.probe_rate_hz = value,
            "altitude_km" => self.pass.altitude_km = value,
            "mu" => self.protocol.mu = value,
            other => {
                return Err(ScenarioError::UnknownAxis {
                    name: other.to_string(),
                })
            }
        }
        Ok(())
    }
}
