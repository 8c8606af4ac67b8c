//! CSV and plot-data emission, plus atomic file writes.
//!
//! Every writer takes a `comment` string that, when nonempty, becomes a
//! leading `# …` line — callers put their full configuration there so any
//! output file can be reproduced from its first line. Floats are written
//! with 17 significant digits and round-trip exactly.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::experiment::{fit_log2, ConvergenceRecord, SweepRow};
use crate::faber::DecayRow;
use crate::generators::CubatureRule;
use crate::util::fmt_g17;

fn write_comment(w: &mut dyn Write, comment: &str) -> Result<()> {
    if !comment.is_empty() {
        writeln!(w, "# {comment}")?;
    }
    Ok(())
}

/// Point/weight table: a `dim,N,weighted` key line with its value line,
/// then one row per point (coordinates then weight).
pub fn write_points_csv(w: &mut dyn Write, rule: &CubatureRule, comment: &str) -> Result<()> {
    write_comment(w, comment)?;
    writeln!(w, "dim,N,weighted")?;
    let weighted = u8::from(!rule.is_equal_weight());
    writeln!(w, "{},{},{}", rule.dimension(), rule.len(), weighted)?;
    let coords = rule.coords_f64();
    let weights = rule.weights_f64();
    let d = rule.dimension();
    for i in 0..rule.len() {
        let mut line = String::new();
        for j in 0..d {
            line.push_str(&fmt_g17(coords[i * d + j]));
            line.push(',');
        }
        line.push_str(&fmt_g17(weights[i]));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// One worst-case-error measurement, ready for the CSV table.
#[derive(Clone, Debug)]
pub struct WceRow {
    pub method: String,
    pub d: usize,
    /// Smoothness as given on the command line (kept textual so 3/2 prints
    /// as written).
    pub r: String,
    /// Dyadic exponent when the method has one.
    pub n: Option<u32>,
    pub count: usize,
    pub error: f64,
    pub squared: f64,
    pub mode: &'static str,
    pub seconds: f64,
}

pub fn write_wce_csv(w: &mut dyn Write, rows: &[WceRow], comment: &str) -> Result<()> {
    write_comment(w, comment)?;
    writeln!(w, "method,d,r,n,N,wce,wce_squared,mode,seconds")?;
    for row in rows {
        let n = row.n.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{:.6}",
            row.method,
            row.d,
            row.r,
            n,
            row.count,
            fmt_g17(row.error),
            fmt_g17(row.squared),
            row.mode,
            row.seconds
        )?;
    }
    Ok(())
}

/// Sweep table; `slope_so_far` is the plain fit over the rows up to and
/// including the current one (empty until two points exist).
pub fn write_sweep_csv(
    w: &mut dyn Write,
    records: &[ConvergenceRecord],
    comment: &str,
) -> Result<()> {
    write_comment(w, comment)?;
    writeln!(w, "method,d,r,n,N,error,slope_so_far,seed,seconds")?;
    for rec in records {
        let mut xy: Vec<(f64, f64)> = Vec::with_capacity(rec.rows.len());
        for row in &rec.rows {
            xy.push(((row.count as f64).log2(), row.error.log2()));
            let slope = if xy.len() >= 2 {
                fit_log2(&xy, false).map(|f| fmt_g17(f.slope)).unwrap_or_default()
            } else {
                String::new()
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{:.6}",
                rec.method,
                rec.d,
                rec.label,
                row.n,
                row.count,
                fmt_g17(row.error),
                slope,
                rec.seed,
                row.seconds
            )?;
        }
    }
    Ok(())
}

/// Haar-coefficient decay table.
pub fn write_decay_csv(w: &mut dyn Write, rows: &[DecayRow], comment: &str) -> Result<()> {
    write_comment(w, comment)?;
    writeln!(w, "ell,max_mu,bound_prop57,ratio")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.ell,
            fmt_g17(row.max_mu_f64()),
            fmt_g17(row.bound),
            fmt_g17(row.ratio())
        )?;
    }
    Ok(())
}

/// Two-column `N error` series for direct plotting; `#`-comment header.
pub fn write_plot_series(w: &mut dyn Write, rows: &[SweepRow], comment: &str) -> Result<()> {
    write_comment(w, comment)?;
    for row in rows {
        writeln!(w, "{} {}", row.count, fmt_g17(row.error))?;
    }
    Ok(())
}

/// Writes through a dot-prefixed temporary in the same directory and
/// renames into place, so a failed run never leaves a partial output file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| crate::Error::domain(format!("output path {} has no file name", path.display())))?;
    let tmp = match dir {
        Some(d) => d.join(format!(".{}.tmp", name.to_string_lossy())),
        None => Path::new(&format!(".{}.tmp", name.to_string_lossy())).to_path_buf(),
    };
    let result = (|| -> Result<()> {
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::equispaced;

    #[test]
    fn points_csv_layout() {
        let rule = equispaced(2).unwrap();
        let mut out = Vec::new();
        write_points_csv(&mut out, &rule, "cmd=gen-points n=1").unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# cmd=gen-points n=1");
        assert_eq!(lines[1], "dim,N,weighted");
        assert_eq!(lines[2], "1,2,0");
        assert_eq!(lines.len(), 5);
        let fields: Vec<&str> = lines[4].split(',').collect();
        assert_eq!(fields.len(), 2);
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.5);
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.5);
    }

    #[test]
    fn wce_csv_layout() {
        let row = WceRow {
            method: "equispaced".into(),
            d: 1,
            r: "1".into(),
            n: None,
            count: 1,
            error: (1.0f64 / 12.0).sqrt(),
            squared: 1.0 / 12.0,
            mode: "float",
            seconds: 0.25,
        };
        let mut out = Vec::new();
        write_wce_csv(&mut out, &[row], "").unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "method,d,r,n,N,wce,wce_squared,mode,seconds");
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "equispaced");
        assert_eq!(fields[3], ""); // no dyadic exponent
        assert_eq!(fields[6].parse::<f64>().unwrap(), 1.0 / 12.0);
        assert_eq!(fields[7], "float");
    }

    #[test]
    fn sweep_csv_prefix_slopes() {
        let rec = ConvergenceRecord {
            method: "halton".into(),
            d: 1,
            label: "2".into(),
            rows: vec![
                SweepRow { n: 2, count: 4, error: 0.25, seconds: 0.0 },
                SweepRow { n: 3, count: 8, error: 0.125, seconds: 0.0 },
                SweepRow { n: 4, count: 16, error: 0.0625, seconds: 0.0 },
            ],
            slope: None,
            residual: None,
            seed: 7,
            matrix_checksum: None,
            mode: "float",
        };
        let mut out = Vec::new();
        write_sweep_csv(&mut out, &[rec], "").unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[6], ""); // one point: no slope yet
        let second: Vec<&str> = lines[2].split(',').collect();
        assert!((second[6].parse::<f64>().unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(first[7], "7");
    }

    #[test]
    fn decay_csv_layout() {
        let origin = crate::f2::PointSet::from_numerators(vec![0], 1, 1).unwrap();
        let rows = crate::faber::haar_decay_profile(&origin, 0, 0).unwrap();
        let mut out = Vec::new();
        write_decay_csv(&mut out, &rows, "cmd=haar").unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "ell,max_mu,bound_prop57,ratio");
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields[0], "0");
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.25);
    }

    #[test]
    fn plot_series_two_columns() {
        let rows =
            vec![SweepRow { n: 2, count: 4, error: 0.25, seconds: 0.0 }];
        let mut out = Vec::new();
        write_plot_series(&mut out, &rows, "m").unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(' ').collect();
        assert_eq!(fields.len(), 2);
        assert_eq!(fields[0], "4");
    }

    #[test]
    fn atomic_write_replaces_without_residue() {
        let dir = std::env::temp_dir().join(format!("export-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, b"first\n").unwrap();
        write_atomic(&path, b"second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        let leftovers: Vec<_> = std::fs::read_dir(&dir)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
