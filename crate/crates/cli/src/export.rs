//! Solution files: one JSON document per record plus a CSV summary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::sweep::SolutionRecord;
use crate::SCHEMA_VERSION;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: [&str; 8] = ["weight", "algo", "f", "f_L", "f_B", "h", "gap", "time"];

/// Formats `x` with nine significant digits in plain or scientific notation,
/// whichever the magnitude calls for.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        // Round first so carries such as 9.9999999996 -> 10 are handled.
        let s = format!("{:.8e}", x);
        let v: f64 = s.parse().expect("valid float");
        let exp = v.abs().log10().floor() as i32;
        let decimals = (8 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

pub fn record_file_name(r: &SolutionRecord) -> String {
    format!("solution_w{:.4}_{}_{:03}.json", r.weight, r.algo.name(), r.rank)
}

pub fn write_summary(records: &[SolutionRecord], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(SUMMARY_HEADER)?;
    for r in records {
        w.write_record([
            sig9(r.weight),
            r.algo.name().to_string(),
            sig9(r.f),
            sig9(r.f_l),
            sig9(r.f_b),
            opt(r.h),
            opt(r.gap),
            sig9(r.time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every record as JSON and the summary CSV into `dir`.
pub fn export(records: &[SolutionRecord], dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::with_capacity(records.len() + 1);
    for r in records {
        let path = dir.join(record_file_name(r));
        let text = serde_json::to_string_pretty(r)?;
        fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    let summary = dir.join(SUMMARY_FILE);
    write_summary(records, &summary)?;
    written.push(summary);
    Ok(written)
}

pub fn read_record(path: &Path) -> anyhow::Result<SolutionRecord> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let r: SolutionRecord = serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("{}: {}: {}", path.display(), e.path(), e.inner()))?;
    anyhow::ensure!(
        r.schema_version == SCHEMA_VERSION,
        "{}: unsupported schema_version {}",
        path.display(),
        r.schema_version
    );
    r.check_objective()
        .with_context(|| format!("{}: inconsistent objective", path.display()))?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(12.0710678118654), "12.0710678");
        assert_eq!(sig9(0.000123456789123), "0.000123456789");
        assert_eq!(sig9(-2.5), "-2.50000000");
        assert_eq!(sig9(9.9999999996), "10.0000000");
        assert_eq!(sig9(1.5e20), "1.50000000e20");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn empty_records_give_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let files = export(&[], dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        let text = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(text, "weight,algo,f,f_L,f_B,h,gap,time\n");
    }
}
