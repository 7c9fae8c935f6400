//! Trajectory CSV and run metadata.
//!
//! One row per recorded sample: `t`, then for each agent its position,
//! velocity, filter output, reference position and reference velocity
//! (`p` columns each), then the six metric columns. Every value is written in
//! scientific notation with 17 significant digits, so parsing and rewriting a
//! file reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gains::{GainReport, GainSet};
use crate::graph::Spectrum;
use crate::io::scenario::Scenario;
use crate::signals::SignalBounds;
use crate::sim::{MetricSample, Trajectory};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("trajectory is empty")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("metadata: {0}")]
    Json(#[from] serde_json::Error),
}

const AGENT_GROUPS: [&str; 5] = ["x", "v", "w", "r", "vr"];

/// Column names for `n` agents in dimension `p`.
pub fn header(n: usize, p: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 1..=n {
        for group in AGENT_GROUPS {
            cols.extend((1..=p).map(|k| format!("{group}{i}_{k}")));
        }
    }
    cols.extend(MetricSample::COLUMNS.iter().map(|c| c.to_string()));
    cols
}

fn push_value(line: &mut String, v: f64) {
    if !line.is_empty() {
        line.push(',');
    }
    write!(line, "{v:.16e}").expect("writing to a String cannot fail");
}

/// Parsed trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self, ExportError> {
        let first = traj.states.first().ok_or(ExportError::Empty)?;
        let header = header(first.agent_count(), first.dimension());
        let rows = traj
            .times
            .iter()
            .zip(&traj.states)
            .zip(&traj.metrics)
            .map(|((&t, s), m)| {
                let mut row = Vec::with_capacity(header.len());
                row.push(t);
                for i in 0..s.agent_count() {
                    for group in [&s.x[i], &s.v[i], &s.w[i], &s.r[i], &s.vr[i]] {
                        row.extend(group.iter().copied());
                    }
                }
                row.extend(m.values());
                row
            })
            .collect();
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut line = String::new();
            for &v in row {
                push_value(&mut line, v);
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ExportError> {
        let mut lines = text.lines().enumerate();
        let (_, head) = lines.next().ok_or(ExportError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let header: Vec<String> = head.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let row = line
                .split(',')
                .map(|cell| {
                    cell.parse::<f64>().map_err(|e| ExportError::Parse {
                        line: idx + 1,
                        message: format!("`{cell}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != header.len() {
                return Err(ExportError::Parse {
                    line: idx + 1,
                    message: format!("{} cells, header has {}", row.len(), header.len()),
                });
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExportError> {
    fs::write(path, contents).map_err(|source| ExportError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn export_trajectory(traj: &Trajectory, path: &Path) -> Result<(), ExportError> {
    write_file(path, &Table::from_trajectory(traj)?.to_csv())
}

pub fn read_trajectory(path: &Path) -> Result<Table, ExportError> {
    let text = fs::read_to_string(path).map_err(|source| ExportError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Table::parse(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub completed: bool,
    pub final_time: f64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
}

/// Everything needed to understand and repeat a run. Only `scenario` is read
/// back when re-running.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub scenario: &'a Scenario,
    pub spectrum: &'a Spectrum,
    pub signal_bounds: &'a SignalBounds,
    pub gains: &'a GainSet,
    pub gain_report: &'a GainReport,
    pub outcome: RunOutcome,
    pub trajectory_file: String,
    pub plots: Vec<String>,
}

#[derive(Deserialize)]
struct ScenarioOnly {
    scenario: Scenario,
}

pub fn write_metadata(meta: &RunMetadata<'_>, path: &Path) -> Result<(), ExportError> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    write_file(path, &text)
}

/// The resolved scenario stored in a metadata file.
pub fn scenario_from_metadata(text: &str) -> Result<Scenario, ExportError> {
    Ok(serde_json::from_str::<ScenarioOnly>(text)?.scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SystemState;
    use crate::gains::GainSet;
    use crate::graph::build_graph;
    use crate::sim::compute_metrics;
    use crate::Vector;

    fn one_sample() -> Trajectory {
        let g = build_graph(1, &[]).unwrap();
        let v = |a: f64, b: f64| vec![Vector::from_vec(vec![a, b])];
        let s = SystemState::new(
            0.25,
            v(1.0, -2.0),
            v(0.1, 0.2),
            v(3.0, 4.0),
            v(0.0, 1.0),
            v(-1.0, 1e-300),
            &g,
            1.0,
        );
        let m = compute_metrics(&s, &g, &GainSet::communication(1.0, 1.0, 1.0));
        Trajectory {
            times: vec![0.25],
            states: vec![s],
            metrics: vec![m],
        }
    }

    #[test]
    fn column_count_for_one_agent() {
        let csv = Table::from_trajectory(&one_sample()).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), 17);
        assert_eq!(lines[1].split(',').count(), 17);
        assert!(lines[0].starts_with("t,x1_1,x1_2,v1_1,v1_2,w1_1"));
        assert!(lines[0].ends_with("pos_err,vel_err,s1,s2,lyapunov,consensus_err"));
    }

    #[test]
    fn values_carry_seventeen_significant_digits() {
        let csv = Table::from_trajectory(&one_sample()).unwrap().to_csv();
        let first = csv.lines().nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(first, "2.5000000000000000e-1");
    }

    #[test]
    fn parse_and_rewrite_is_byte_identical() {
        let csv = Table::from_trajectory(&one_sample()).unwrap().to_csv();
        assert_eq!(Table::parse(&csv).unwrap().to_csv(), csv);
    }

    #[test]
    fn empty_trajectory_is_refused() {
        let empty = Trajectory {
            times: vec![],
            states: vec![],
            metrics: vec![],
        };
        assert!(matches!(
            Table::from_trajectory(&empty),
            Err(ExportError::Empty)
        ));
    }

    #[test]
    fn unwritable_path_is_reported() {
        let err =
            export_trajectory(&one_sample(), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, ExportError::Write { .. }));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(matches!(
            Table::parse("t,a\n1,2,3\n"),
            Err(ExportError::Parse { line: 2, .. })
        ));
    }
}
