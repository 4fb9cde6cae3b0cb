//! Tabular results with named checks, CSV serialization and a small
//! log-log SVG plotter.
//!
//! Tables are written atomically and with fixed formatting, so a rerun of
//! the same configuration produces byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// One named inequality verdict with the numbers that produced it.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
}

/// Numeric columns plus metadata footers, checks and warnings.
#[derive(Clone, Debug, Default)]
pub struct ReportTable {
    title: String,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    meta: Vec<(String, String)>,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

impl ReportTable {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        ReportTable {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row arity mismatch");
        self.rows.push(row);
    }

    pub fn add_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn add_check(&mut self, name: impl Into<String>, passed: bool, measured: f64, bound: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            measured,
            bound,
        });
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn meta(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Value of a metadata key, if present.
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// CSV text: header, data rows, then `# key=value` footers, one per
    /// metadata entry, check and warning.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "# check:{}={} measured={} bound={}",
                c.name,
                if c.passed { "pass" } else { "fail" },
                c.measured,
                c.bound
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning:{w}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    /// Log-log polyline plot of `y_columns` against `x_column`, 800x600 SVG.
    ///
    /// Non-positive values cannot be drawn on log axes and are skipped.
    pub fn write_svg(&self, path: &Path, x_column: &str, y_columns: &[&str]) -> Result<()> {
        let xi = self.column_index(x_column)?;
        let yis: Vec<usize> = y_columns
            .iter()
            .map(|c| self.column_index(c))
            .collect::<Result<_>>()?;

        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for row in &self.rows {
            if row[xi] > 0.0 {
                for &yi in &yis {
                    if row[yi] > 0.0 {
                        xs.push(row[xi]);
                        ys.push(row[yi]);
                    }
                }
            }
        }
        if xs.is_empty() {
            return Err(Error::Format("no positive data to plot".to_string()));
        }
        let (x_lo, x_hi) = log_span(&xs);
        let (y_lo, y_hi) = log_span(&ys);

        const W: f64 = 800.0;
        const H: f64 = 600.0;
        const ML: f64 = 70.0;
        const MR: f64 = 20.0;
        const MT: f64 = 40.0;
        const MB: f64 = 50.0;
        let sx = |x: f64| ML + (x.log10() - x_lo) / (x_hi - x_lo) * (W - ML - MR);
        let sy = |y: f64| H - MB - (y.log10() - y_lo) / (y_hi - y_lo) * (H - MT - MB);

        const PALETTE: [&str; 6] = ["#1f6f8b", "#c05746", "#4a7c59", "#8c5383", "#b08b2e", "#555555"];
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>",
            W - ML - MR,
            H - MT - MB
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"15\">{}</text>",
            ML,
            xml_escape(&self.title)
        );
        // Decade tick marks on both axes.
        let mut d = x_lo.ceil() as i64;
        while (d as f64) <= x_hi {
            let px = sx(10f64.powi(d as i32));
            let _ = writeln!(
                svg,
                "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"#ccc\"/>",
                MT,
                H - MB
            );
            let _ = writeln!(
                svg,
                "<text x=\"{px:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>",
                H - MB + 16.0
            );
            d += 1;
        }
        let mut d = y_lo.ceil() as i64;
        while (d as f64) <= y_hi {
            let py = sy(10f64.powi(d as i32));
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{}\" y2=\"{py:.2}\" stroke=\"#ccc\"/>",
                ML,
                W - MR
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{py:.2}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>",
                ML - 6.0
            );
            d += 1;
        }
        for (ci, (&yi, name)) in yis.iter().zip(y_columns).enumerate() {
            let color = PALETTE[ci % PALETTE.len()];
            let mut pts = String::new();
            for row in &self.rows {
                if row[xi] > 0.0 && row[yi] > 0.0 {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(row[xi]), sy(row[yi]));
                }
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                pts.trim_end()
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>",
                W - MR - 170.0,
                MT + 18.0 + 16.0 * ci as f64,
                xml_escape(name)
            );
        }
        let _ = writeln!(svg, "</svg>");
        write_atomic(path, svg.as_bytes())
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Format(format!("no column named {name}")))
    }
}

fn log_span(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        let l = v.log10();
        lo = lo.min(l);
        hi = hi.max(l);
    }
    if hi - lo < 1e-9 {
        // Degenerate span: pad half a decade each way.
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> ReportTable {
        let mut t = ReportTable::new("decay", &["n", "norm"]);
        for n in 1..=8 {
            t.push_row(vec![n as f64, (n as f64).powf(-1.5)]);
        }
        t.add_meta("dhat", 1.5);
        t.add_check("tail_bound", true, 0.9, 1.0);
        t
    }

    #[test]
    fn csv_layout_and_determinism() {
        let t = sample_table();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,norm");
        assert_eq!(lines[1], "1,1");
        assert!(lines[9].starts_with("# dhat=1.5"));
        assert!(lines[10].contains("check:tail_bound=pass"));
        assert_eq!(csv, sample_table().to_csv());
    }

    #[test]
    fn csv_round_trip_values() {
        let mut t = ReportTable::new("x", &["a"]);
        let vals = [1.0 / 3.0, 2.5e-17, 6.02e23, 1.0];
        for v in vals {
            t.push_row(vec![v]);
        }
        for (line, v) in t.to_csv().lines().skip(1).zip(vals) {
            let back: f64 = line.parse().unwrap();
            assert_eq!(back, v, "{line}");
        }
    }

    #[test]
    fn meta_lookup_and_check_summary() {
        let mut t = sample_table();
        assert_eq!(t.meta_value("dhat"), Some("1.5"));
        assert_eq!(t.meta_value("absent"), None);
        assert!(t.all_checks_passed());
        t.add_check("broken", false, 2.0, 1.0);
        assert!(!t.all_checks_passed());
    }

    #[test]
    fn svg_has_polyline_and_is_deterministic() {
        let t = sample_table();
        let dir = std::env::temp_dir().join("beltrami_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plot.svg");
        t.write_svg(&path, "n", &["norm"]).unwrap();
        let first = std::fs::read(&path).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("<polyline"));
        t.write_svg(&path, "n", &["norm"]).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn svg_rejects_unknown_columns_and_empty_data() {
        let t = sample_table();
        let dir = std::env::temp_dir().join("beltrami_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.svg");
        assert!(t.write_svg(&path, "nope", &["norm"]).is_err());
        let mut empty = ReportTable::new("e", &["n", "y"]);
        empty.push_row(vec![1.0, -2.0]);
        assert!(empty.write_svg(&path, "n", &["y"]).is_err());
    }
}
