//! Table writing. Both files of a run land together or not at all: content
//! is staged under temporary names and renamed into place only once both
//! writes succeeded.

use qlink_core::figures::FigureOutput;
use qlink_core::scenario::Scenario;
use std::path::{Path, PathBuf};

/// Output directory precedence: --out flag, then the scenario's
/// `output_dir`, then the QLINK_OUT_DIR environment variable, then the
/// working directory.
pub fn resolve_out_dir(flag: Option<PathBuf>, scenario: &Scenario) -> PathBuf {
    flag.or_else(|| scenario.output_dir.clone())
        .or_else(|| std::env::var_os("QLINK_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes `<stem>.csv` and `<stem>.meta.json` into `dir`. On any failure
/// every partial product (staged temporaries, a half-renamed csv) is
/// removed before the error propagates.
pub fn write_tables(
    dir: &Path,
    stem: &str,
    output: &FigureOutput,
) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta.json"));
    let csv_tmp = dir.join(format!("{stem}.csv.tmp"));
    let meta_tmp = dir.join(format!("{stem}.meta.json.tmp"));

    let mut meta = serde_json::to_string_pretty(&output.meta).expect("meta is plain json");
    meta.push('\n');

    let staged = std::fs::write(&csv_tmp, output.to_csv())
        .and_then(|()| std::fs::write(&meta_tmp, meta))
        .and_then(|()| std::fs::rename(&csv_tmp, &csv_path))
        .and_then(|()| {
            std::fs::rename(&meta_tmp, &meta_path).inspect_err(|_| {
                let _ = std::fs::remove_file(&csv_path);
            })
        });
    if staged.is_err() {
        let _ = std::fs::remove_file(&csv_tmp);
        let _ = std::fs::remove_file(&meta_tmp);
    }
    staged.map(|()| (csv_path, meta_path))
}
