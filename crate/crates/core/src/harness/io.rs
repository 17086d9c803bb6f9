//! Error-series CSV files and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ErrorSeries;

pub const SERIES_HEADER: [&str; 4] = ["t", "E", "eps", "delta"];
pub const MANIFEST_NAME: &str = "manifest.json";

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// 17 significant digits: enough to round-trip every `f64`.
fn exact(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_error_series(path: &Path, series: &ErrorSeries) -> Result<()> {
    series.validate()?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SERIES_HEADER)?;
    for (t, e) in series.t.iter().zip(&series.e) {
        w.write_record([exact(*t), exact(*e), exact(series.eps), exact(series.delta)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a series written by [`write_error_series`]. Numbers must use `.` as the decimal
/// separator; `eps` and `delta` must agree on every row.
pub fn read_error_series(path: &Path) -> Result<ErrorSeries> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(SERIES_HEADER) {
        return Err(format_error(
            path,
            format!(
                "header must be t,E,eps,delta, got {}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let (mut t, mut e) = (Vec::new(), Vec::new());
    let mut meta: Option<(f64, f64)> = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 4 {
            return Err(format_error(
                path,
                format!("line {line}: expected 4 fields, got {}", rec.len()),
            ));
        }
        let num = |j: usize| -> Result<f64> {
            let s = rec[j].trim();
            s.parse::<f64>()
                .map_err(|_| format_error(path, format!("line {line}: {s:?} is not a number")))
        };
        let row = (num(0)?, num(1)?, num(2)?, num(3)?);
        match meta {
            None => meta = Some((row.2, row.3)),
            Some((eps, delta)) => {
                let same = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
                if !(same(eps, row.2) && same(delta, row.3)) {
                    return Err(format_error(
                        path,
                        format!("line {line}: eps/delta change mid-file"),
                    ));
                }
            }
        }
        t.push(row.0);
        e.push(row.1);
    }
    let (eps, delta) = meta.ok_or_else(|| format_error(path, "no data rows"))?;
    ErrorSeries::new(t, e, eps, delta).map_err(|err| format_error(path, err.to_string()))
}

/// Record written beside every run's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Configuration pairs as given.
    pub config: BTreeMap<String, String>,
    /// Values the run resolved or measured (grid sizes, horizons, fits, regime diagnostics).
    pub details: BTreeMap<String, serde_json::Value>,
    /// Output files, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config: &[(String, String)]) -> Self {
        Manifest {
            tool: "nlac".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.iter().cloned().collect(),
            details: BTreeMap::new(),
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn detail(&mut self, key: impl Into<String>, value: impl Serialize) -> Result<()> {
        self.details
            .insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut f = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// A run directory: collects output names for the manifest written at the end.
pub struct RunDir {
    pub dir: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path, name: &str) -> Result<Self> {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir)?;
        Ok(RunDir {
            dir,
            outputs: Vec::new(),
        })
    }

    /// Path for output `name`, registered for the manifest.
    pub fn output(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let path = self.dir.join(&name);
        if !self.outputs.contains(&name) {
            self.outputs.push(name);
        }
        path
    }

    pub fn finish(self, mut manifest: Manifest, started: std::time::Instant) -> Result<PathBuf> {
        manifest.outputs = self.outputs;
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        manifest.write(&self.dir)
    }
}

/// `eps` rendered for file names, e.g. `0.02` -> `eps_0.02`.
pub fn eps_label(eps: f64) -> String {
    format!("eps_{eps}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roundtrip(series: &ErrorSeries) -> ErrorSeries {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_error_series(&path, series).unwrap();
        read_error_series(&path).unwrap()
    }

    proptest! {
        #[test]
        fn series_round_trip_is_lossless(
            steps in proptest::collection::vec(1e-6f64..10.0, 1..40),
            e in proptest::collection::vec(0.0f64..1e3, 40),
            eps in 0.0f64..0.5,
            delta in 0.0f64..1.0,
        ) {
            let mut t = vec![0.0];
            for s in &steps { t.push(t.last().unwrap() + s); }
            let e = e[..t.len()].to_vec();
            let s = ErrorSeries::new(t, e, eps, delta).unwrap();
            let back = roundtrip(&s);
            prop_assert_eq!(back.t.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), s.t.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back.e.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), s.e.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back.eps.to_bits(), eps.to_bits());
            prop_assert_eq!(back.delta.to_bits(), delta.to_bits());
        }
    }

    #[test]
    fn extreme_values_round_trip() {
        let s = ErrorSeries::new(
            vec![0.0, 1e-300, 0.1 + 0.2, 1e300],
            vec![5e-324, f64::MAX, 0.0, 1.0 / 3.0],
            f64::NAN,
            0.0,
        )
        .unwrap();
        let back = roundtrip(&s);
        assert_eq!(back.t, s.t);
        assert_eq!(back.e, s.e);
        assert!(back.eps.is_nan());
    }

    fn read_text(text: &str) -> Result<ErrorSeries> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, text).unwrap();
        read_error_series(&path)
    }

    #[test]
    fn malformed_files_are_rejected() {
        for text in [
            "",
            "t,E,eps,delta\n",
            "time,E,eps,delta\n0,1,0.1,0\n",
            "t,E,eps,delta\n0,1,0.1,0\n0,2,0.1,0\n",
            "t,E,eps,delta\n1,1,0.1,0\n0,2,0.1,0\n",
            "t,E,eps,delta\n0,-1,0.1,0\n",
            "t,E,eps,delta\n0,1,0.1,0\n1,1,0.2,0\n",
            "t;E;eps;delta\n0;1,5;0.1;0\n",
            "t,E,eps,delta\n0,\"1,5\",0.1,0\n",
        ] {
            assert!(read_text(text).is_err(), "{text:?} was accepted");
        }
        assert_eq!(
            read_text("t,E,eps,delta\n0,1.5,0.1,0\n").unwrap().e,
            vec![1.5]
        );
    }

    #[test]
    fn manifest_round_trips_and_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = RunDir::create(dir.path(), "run").unwrap();
        let p = run.output("a.csv");
        std::fs::write(&p, "x").unwrap();
        run.output("a.csv");
        let mut m = Manifest::new("compare E1", &[("eps".into(), "0.02".into())]);
        m.detail("grid", [128, 64]).unwrap();
        let path = run.finish(m, std::time::Instant::now()).unwrap();
        let back = Manifest::read(&path).unwrap();
        assert_eq!(back.outputs, vec!["a.csv".to_string()]);
        assert_eq!(back.config["eps"], "0.02");
        assert_eq!(back.details["grid"], serde_json::json!([128, 64]));
    }
}
