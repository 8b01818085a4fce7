//! CSV and JSON writers. Every study directory holds `config.json` (the
//! resolved run configuration) next to its series and summaries.
//!
//! Column schemas:
//! - `series.csv`: `step, t, dt, lte, attempts, clamp, ut_norm`
//! - `roots.csv`: `step, t, dt, rho_1, ..., rho_k` (descending magnitudes)
//! - `voltage.csv`: `t, v`
//! - `profile-*.csv`: `x, c_plus, c_minus, phi`
//! - `state.csv`: `index, value` (final evolved state)

use std::fs;
use std::path::{Path, PathBuf};

use pnp_core::stability::RootReportRow;
use pnp_core::stepper::StepReport;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::ExperimentError;
use crate::studies::profiles::Profile;

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, ExperimentError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| ExperimentError::io(&root, e))?;
        Ok(OutputDir { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf, ExperimentError> {
        let p = self.path(name);
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&p, text + "\n").map_err(|e| ExperimentError::io(&p, e))?;
        Ok(p)
    }

    pub fn config(&self, cfg: &RunConfig) -> Result<PathBuf, ExperimentError> {
        self.json("config.json", cfg)
    }

    pub fn rows<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, ExperimentError> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| ExperimentError::io(&p, e))?;
        Ok(p)
    }

    pub fn series(&self, name: &str, reports: &[StepReport]) -> Result<PathBuf, ExperimentError> {
        #[derive(Serialize)]
        struct Row<'a> {
            step: usize,
            t: f64,
            dt: f64,
            lte: f64,
            attempts: usize,
            clamp: &'a str,
            ut_norm: f64,
        }
        let rows: Vec<Row> = reports
            .iter()
            .map(|r| Row {
                step: r.step,
                t: r.t,
                dt: r.dt,
                lte: r.lte,
                attempts: r.attempts,
                clamp: r.clamp.as_str(),
                ut_norm: r.ut_norm,
            })
            .collect();
        self.rows(name, &rows)
    }

    pub fn roots(&self, name: &str, rows: &[RootReportRow]) -> Result<PathBuf, ExperimentError> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p)?;
        let k = rows.iter().map(|r| r.magnitudes.len()).max().unwrap_or(0);
        let mut header = vec!["step".to_string(), "t".into(), "dt".into()];
        header.extend((1..=k).map(|i| format!("rho_{i}")));
        w.write_record(&header)?;
        for r in rows {
            let mut rec = vec![r.step.to_string(), r.t.to_string(), r.dt.to_string()];
            rec.extend(r.magnitudes.iter().map(|m| m.to_string()));
            rec.resize(k + 3, String::new());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| ExperimentError::io(&p, e))?;
        Ok(p)
    }

    pub fn pairs(
        &self,
        name: &str,
        header: [&str; 2],
        rows: &[(f64, f64)],
    ) -> Result<PathBuf, ExperimentError> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(header)?;
        for (a, b) in rows {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        w.flush().map_err(|e| ExperimentError::io(&p, e))?;
        Ok(p)
    }

    pub fn state(&self, name: &str, y: &[f64]) -> Result<PathBuf, ExperimentError> {
        let rows: Vec<(f64, f64)> = y.iter().enumerate().map(|(i, v)| (i as f64, *v)).collect();
        self.pairs(name, ["index", "value"], &rows)
    }

    pub fn profile(&self, name: &str, p: &Profile) -> Result<PathBuf, ExperimentError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["x", "c_plus", "c_minus", "phi"])?;
        for i in 0..p.x.len() {
            w.write_record([
                p.x[i].to_string(),
                p.c_plus[i].to_string(),
                p.c_minus[i].to_string(),
                p.phi[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| ExperimentError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pnp_core::stepper::Clamp;

    #[test]
    fn series_has_the_documented_columns() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path().join("a/b")).unwrap();
        let r = StepReport {
            step: 1,
            t: 0.5,
            dt: 0.5,
            lte: 1e-7,
            attempts: 2,
            clamp: Clamp::DtMax,
            ut_norm: 3.0,
        };
        let p = out.series("series.csv", &[r]).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,t,dt,lte,attempts,clamp,ut_norm"
        );
        assert_eq!(lines.next().unwrap(), "1,0.5,0.5,1e-7,2,dt_max,3.0");
    }

    #[test]
    fn ragged_root_rows_are_padded() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let rows = vec![
            RootReportRow {
                step: 1,
                t: 1.0,
                dt: 0.1,
                magnitudes: vec![1.0, 0.5],
            },
            RootReportRow {
                step: 2,
                t: 1.1,
                dt: 0.1,
                magnitudes: vec![1.0],
            },
        ];
        let text = std::fs::read_to_string(out.roots("roots.csv", &rows).unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), "step,t,dt,rho_1,rho_2");
        assert_eq!(text.lines().nth(2).unwrap(), "2,1.1,0.1,1,");
    }
}
