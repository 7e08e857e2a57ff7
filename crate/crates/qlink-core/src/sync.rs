//! Laser-ranging ingestion and the timing-drift analysis that sizes the
//! self-synchronization pulse rate.
//!
//! Ranging files are two-column text (epoch, range) with a mandatory unit
//! header, either `# units: s,s` for trip times or `# units: s,m` for
//! distances (converted through c on ingest). The drift statistics are
//! agnostic to the one-way/two-way convention of the source; both distance
//! conversions are reported side by side.

use crate::constants::SPEED_OF_LIGHT;
use crate::numeric::{sample_derivative, symmetric_histogram};
use crate::polarization::PassGeometry;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SyncError {
    #[error("cannot read ranging file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: epoch {next} does not increase past {prev}")]
    NonMonotonic { line: usize, prev: f64, next: f64 },
    #[error("unit header must be `# units: s,s` or `# units: s,m`, got {0:?}")]
    UnknownUnits(String),
    #[error("missing `# units: ...` header before the first data row")]
    MissingUnits,
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("{0}")]
    InvalidInput(String),
}

/// Unit of the second column as declared by the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeUnit {
    Seconds,
    Meters,
}

impl RangeUnit {
    fn parse(s: &str) -> Result<Self, SyncError> {
        match s {
            "s,s" => Ok(RangeUnit::Seconds),
            "s,m" => Ok(RangeUnit::Meters),
            other => Err(SyncError::UnknownUnits(other.to_string())),
        }
    }

    pub fn header(self) -> &'static str {
        match self {
            RangeUnit::Seconds => "# units: s,s",
            RangeUnit::Meters => "# units: s,m",
        }
    }
}

/// One ranging sample; the trip time is stored in seconds regardless of the
/// source unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangingRecord {
    pub epoch: f64,
    pub trip_time: f64,
}

/// Validated ranging series with sampling gaps marked, never interpolated.
#[derive(Debug, Clone)]
pub struct RangingSeries {
    pub records: Vec<RangingRecord>,
    /// Unit of the file this series came from (or should be written with).
    pub unit: RangeUnit,
    /// Indices i where the step records[i] -> records[i+1] exceeds five
    /// times the median sampling interval.
    pub gaps: Vec<usize>,
}

impl RangingSeries {
    pub fn new(records: Vec<RangingRecord>, unit: RangeUnit) -> Result<Self, SyncError> {
        for (i, r) in records.iter().enumerate() {
            if !(r.epoch.is_finite() && r.trip_time.is_finite() && r.trip_time > 0.0) {
                return Err(SyncError::InvalidInput(format!(
                    "record {i}: epoch and positive trip time required, got ({}, {})",
                    r.epoch, r.trip_time
                )));
            }
            if i > 0 && r.epoch <= records[i - 1].epoch {
                return Err(SyncError::InvalidInput(format!(
                    "record {i}: epoch {} does not increase past {}",
                    r.epoch,
                    records[i - 1].epoch
                )));
            }
        }
        let gaps = flag_gaps(&records);
        Ok(RangingSeries {
            records,
            unit,
            gaps,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn epochs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.epoch).collect()
    }

    pub fn trip_times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.trip_time).collect()
    }

    /// Serializes back to the two-column text form, second column in the
    /// series' declared unit. Float formatting round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from(self.unit.header());
        out.push('\n');
        for r in &self.records {
            let value = match self.unit {
                RangeUnit::Seconds => r.trip_time,
                RangeUnit::Meters => r.trip_time * SPEED_OF_LIGHT,
            };
            out.push_str(&format!("{},{}\n", r.epoch, value));
        }
        out
    }
}

fn flag_gaps(records: &[RangingRecord]) -> Vec<usize> {
    if records.len() < 3 {
        return Vec::new();
    }
    let mut dts: Vec<f64> = records
        .windows(2)
        .map(|w| w[1].epoch - w[0].epoch)
        .collect();
    let mut sorted = dts.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    dts.drain(..)
        .enumerate()
        .filter(|(_, dt)| *dt > 5.0 * median)
        .map(|(i, _)| i)
        .collect()
}

/// Parses ranging text. Comment lines start with `#`; the unit header must
/// appear before the first data row; fields split on commas or whitespace.
pub fn parse_ranging(text: &str) -> Result<RangingSeries, SyncError> {
    let mut unit: Option<RangeUnit> = None;
    let mut records: Vec<RangingRecord> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(spec) = comment.trim().strip_prefix("units:") {
                unit = Some(RangeUnit::parse(spec.trim())?);
            }
            continue;
        }
        let unit = unit.ok_or(SyncError::MissingUnits)?;
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(SyncError::Format {
                line: line_no,
                message: format!("expected 2 columns, got {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64, SyncError> {
            s.parse::<f64>().map_err(|_| SyncError::Format {
                line: line_no,
                message: format!("cannot parse number {s:?}"),
            })
        };
        let epoch = parse(fields[0])?;
        let value = parse(fields[1])?;
        let trip_time = match unit {
            RangeUnit::Seconds => value,
            RangeUnit::Meters => value / SPEED_OF_LIGHT,
        };
        if !(trip_time.is_finite() && trip_time > 0.0) {
            return Err(SyncError::Format {
                line: line_no,
                message: format!("range must be positive and finite, got {value}"),
            });
        }
        if let Some(last) = records.last() {
            if epoch <= last.epoch {
                return Err(SyncError::NonMonotonic {
                    line: line_no,
                    prev: last.epoch,
                    next: epoch,
                });
            }
        }
        records.push(RangingRecord { epoch, trip_time });
    }
    let unit = unit.ok_or(SyncError::MissingUnits)?;
    let gaps = flag_gaps(&records);
    Ok(RangingSeries {
        records,
        unit,
        gaps,
    })
}

pub fn ingest_ranging(path: &Path) -> Result<RangingSeries, SyncError> {
    parse_ranging(&std::fs::read_to_string(path)?)
}

/// Trip-time drift statistics of one ranging series.
#[derive(Debug, Clone)]
pub struct DriftStats {
    /// Per-sample d(tau)/dt in s/s.
    pub dtau_dt: Vec<f64>,
    pub max_abs: f64,
    /// c * max drift: distance-rate equivalent if tau were one-way.
    pub range_rate_one_way: f64,
    /// c * max drift / 2: equivalent under a two-way convention.
    pub range_rate_two_way: f64,
    /// (bin center, count) over [-max_abs, max_abs].
    pub histogram: Vec<(f64, u64)>,
    pub samples: usize,
}

pub fn drift_statistics(series: &RangingSeries, bins: usize) -> Result<DriftStats, SyncError> {
    if series.len() < 2 {
        return Err(SyncError::TooFewRecords {
            needed: 2,
            got: series.len(),
        });
    }
    if bins == 0 {
        return Err(SyncError::InvalidInput("histogram needs at least one bin".into()));
    }
    let dtau_dt = sample_derivative(&series.epochs(), &series.trip_times());
    let max_abs = dtau_dt.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let histogram = symmetric_histogram(&dtau_dt, bins);
    Ok(DriftStats {
        samples: dtau_dt.len(),
        max_abs,
        range_rate_one_way: SPEED_OF_LIGHT * max_abs,
        range_rate_two_way: SPEED_OF_LIGHT * max_abs / 2.0,
        histogram,
        dtau_dt,
    })
}

/// Synchronization pulse rate required to track a drifting channel, with
/// an engineering margin band of 1.25x to 2.5x.
#[derive(Debug, Clone, Copy)]
pub struct SyncRate {
    pub base: f64,
    pub margin_low: f64,
    pub margin_high: f64,
}

/// rate = max_drift / target_accuracy: one synchronization pulse per
/// accuracy-quantum of accumulated drift.
pub fn required_sync_rate(max_drift: f64, target_accuracy: f64) -> Result<SyncRate, SyncError> {
    if !(max_drift.is_finite()
        && max_drift > 0.0
        && target_accuracy.is_finite()
        && target_accuracy > 0.0)
    {
        return Err(SyncError::InvalidInput(format!(
            "need positive drift and accuracy, got {max_drift} and {target_accuracy}"
        )));
    }
    let base = max_drift / target_accuracy;
    Ok(SyncRate {
        base,
        margin_low: 1.25 * base,
        margin_high: 2.5 * base,
    })
}

/// Synthesizes the ranging record of a circular overhead pass, two-way
/// convention: tau(t) = 2 d(t) / c. Epochs start at zero.
pub fn synthesize_pass(
    altitude: f64,
    step: f64,
    min_elevation: f64,
) -> Result<RangingSeries, SyncError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(SyncError::InvalidInput(format!(
            "sampling step must be positive, got {step}"
        )));
    }
    let pass = PassGeometry::new(altitude, std::f64::consts::FRAC_PI_2, min_elevation)
        .map_err(|e| SyncError::InvalidInput(e.to_string()))?;
    let (start, _) = pass.window();
    let records = pass
        .sample_times(step)
        .into_iter()
        .map(|t| RangingRecord {
            epoch: t - start,
            trip_time: 2.0 * pass.range(t) / SPEED_OF_LIGHT,
        })
        .collect();
    RangingSeries::new(records, RangeUnit::Seconds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(epochs: &[f64], taus: &[f64]) -> RangingSeries {
        let records = epochs
            .iter()
            .zip(taus)
            .map(|(&epoch, &trip_time)| RangingRecord { epoch, trip_time })
            .collect();
        RangingSeries::new(records, RangeUnit::Seconds).unwrap()
    }

    #[test]
    fn parses_well_formed_rows_with_either_separator() {
        let s = parse_ranging("# units: s,s\n0,0.003\n1 0.0031\n2,\t0.0032\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.records[1].epoch, 1.0);
        assert_eq!(s.records[2].trip_time, 0.0032);
        assert_eq!(s.unit, RangeUnit::Seconds);
    }

    #[test]
    fn meters_convert_through_the_speed_of_light() {
        let s = parse_ranging("# units: s,m\n0,299792458\n1,599584916\n").unwrap();
        assert!((s.records[0].trip_time - 1.0).abs() < 1e-15);
        assert!((s.records[1].trip_time - 2.0).abs() < 1e-15);
    }

    #[test]
    fn decreasing_epoch_names_the_line() {
        let err = parse_ranging("# units: s,s\n0,1e-3\n1,1e-3\n0.5,1e-3\n").unwrap_err();
        match err {
            SyncError::NonMonotonic { line, .. } => assert_eq!(line, 4),
            other => panic!("expected NonMonotonic, got {other:?}"),
        }
    }

    #[test]
    fn header_problems_are_rejected() {
        assert!(matches!(
            parse_ranging("0,1e-3\n"),
            Err(SyncError::MissingUnits)
        ));
        assert!(matches!(
            parse_ranging("# units: s,furlong\n0,1e-3\n"),
            Err(SyncError::UnknownUnits(_))
        ));
    }

    #[test]
    fn malformed_rows_are_rejected_with_positions() {
        let err = parse_ranging("# units: s,s\n0,1e-3\nnonsense\n").unwrap_err();
        match err {
            SyncError::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("expected Format, got {other:?}"),
        }
        assert!(parse_ranging("# units: s,s\n0,-1e-3\n").is_err());
        assert!(parse_ranging("# units: s,s\n0,1e-3,7\n").is_err());
    }

    #[test]
    fn sampling_gaps_are_flagged_not_hidden() {
        let s = parse_ranging("# units: s,s\n0,1e-3\n1,1e-3\n2,1e-3\n3,1e-3\n10,1e-3\n11,1e-3\n")
            .unwrap();
        assert_eq!(s.gaps, vec![3]);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn constant_range_has_zero_drift() {
        let s = series_from(&[0.0, 1.0, 2.0, 3.0], &[2e-3; 4]);
        let stats = drift_statistics(&s, 11).unwrap();
        assert_eq!(stats.max_abs, 0.0);
        assert!(stats.dtau_dt.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn linear_range_recovers_the_slope_exactly() {
        let epochs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let taus: Vec<f64> = epochs.iter().map(|t| 1e-3 + 4e-5 * t).collect();
        let s = series_from(&epochs, &taus);
        let stats = drift_statistics(&s, 11).unwrap();
        for d in &stats.dtau_dt {
            assert!((d - 4e-5).abs() < 1e-18);
        }
        assert!((stats.range_rate_one_way - SPEED_OF_LIGHT * 4e-5).abs() < 1e-6);
        assert!((stats.range_rate_two_way - SPEED_OF_LIGHT * 2e-5).abs() < 1e-6);
    }

    #[test]
    fn histogram_mass_and_translation_invariance() {
        let epochs: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let taus: Vec<f64> = epochs.iter().map(|t| 3e-3 + 1e-5 * (t * 0.05).sin()).collect();
        let base = series_from(&epochs, &taus);
        let shifted = series_from(
            &epochs.iter().map(|t| t + 12_345.0).collect::<Vec<_>>(),
            &taus,
        );
        let a = drift_statistics(&base, 17).unwrap();
        let b = drift_statistics(&shifted, 17).unwrap();
        assert_eq!(a.histogram, b.histogram);
        let mass: u64 = a.histogram.iter().map(|(_, c)| c).sum();
        assert_eq!(mass as usize, a.samples);
    }

    #[test]
    fn too_few_records_is_an_error() {
        let s = series_from(&[0.0], &[1e-3]);
        assert!(matches!(
            drift_statistics(&s, 5),
            Err(SyncError::TooFewRecords { .. })
        ));
    }

    #[test]
    fn synthesized_low_orbit_pass_drifts_tens_of_microseconds_per_second() {
        let s = synthesize_pass(400e3, 1.0, 10f64.to_radians()).unwrap();
        assert!(s.len() > 300, "expected a few-minute pass, got {} samples", s.len());
        assert!(s.gaps.is_empty());
        let stats = drift_statistics(&s, 21).unwrap();
        assert!(
            stats.max_abs > 20e-6 && stats.max_abs < 80e-6,
            "peak drift {} s/s",
            stats.max_abs
        );
        // Two-way bookkeeping keeps the equivalent closing speed below the
        // ~7.7 km/s orbital speed.
        assert!(stats.range_rate_two_way < 7.7e3);
    }

    #[test]
    fn synthesized_pass_round_trips_bit_exactly() {
        let s = synthesize_pass(400e3, 7.0, 15f64.to_radians()).unwrap();
        let parsed = parse_ranging(&s.to_text()).unwrap();
        assert_eq!(parsed.len(), s.len());
        for (a, b) in parsed.records.iter().zip(&s.records) {
            assert_eq!(a.epoch.to_bits(), b.epoch.to_bits());
            assert_eq!(a.trip_time.to_bits(), b.trip_time.to_bits());
        }
    }

    #[test]
    fn meters_files_round_trip_through_their_own_unit() {
        let text = "# units: s,m\n0,500000\n1,500100\n2,500407\n";
        let s = parse_ranging(text).unwrap();
        let re = parse_ranging(&s.to_text()).unwrap();
        for (a, b) in re.records.iter().zip(&s.records) {
            assert!((a.trip_time - b.trip_time).abs() < 1e-24);
        }
    }

    #[test]
    fn sync_rate_pins_the_grace_operating_point() {
        let r = required_sync_rate(40e-6, 1e-9).unwrap();
        assert_eq!(r.base, 40_000.0);
        assert_eq!(r.margin_low, 50_000.0);
        assert_eq!(r.margin_high, 100_000.0);
        // Inverse proportionality in the accuracy target.
        let half = required_sync_rate(40e-6, 2e-9).unwrap();
        assert!((half.base - 20_000.0).abs() < 1e-9);
        assert!(required_sync_rate(0.0, 1e-9).is_err());
    }
}
