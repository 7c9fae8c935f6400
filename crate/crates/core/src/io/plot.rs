//! Standalone SVG plots of a trajectory.
//!
//! `positions.svg` and `velocities.svg` draw the first two components of every
//! agent (against time when `p = 1`) together with the average of the
//! references; agent starts are squares and the initial average is a dot.
//! `metrics.svg` draws the diagnostics on a log scale.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::SystemState;
use crate::sim::{MetricSample, Trajectory};
use crate::Vector;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("need at least 2 samples to plot, got {0}")]
    TooShort(usize),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 60.0;
const MAX_POINTS: usize = 2000;
const LOG_FLOOR: f64 = 1e-16;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

type Series = Vec<(f64, f64)>;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(series: &[&Series]) -> Self {
        let pts = series
            .iter()
            .flat_map(|s| s.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let span = hi - lo;
            if span > 0.0 {
                (lo - 0.05 * span, hi + 0.05 * span)
            } else {
                let d = lo.abs().max(1.0) * 0.5;
                (lo - d, hi + d)
            }
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

struct Canvas {
    body: String,
    frame: Frame,
}

impl Canvas {
    fn new(title: &str, xlabel: &str, ylabel: &str, frame: Frame, log_y: bool) -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>
<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>
<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>
"##,
            WIDTH / 2.0,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN,
        );
        let mut canvas = Self { body, frame };
        canvas.ticks(log_y);
        canvas
    }

    fn ticks(&mut self, log_y: bool) {
        let f = &self.frame;
        for k in 0..=4 {
            let fx = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
            let fy = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
            let ylabel = if log_y {
                format!("1e{fy:.1}")
            } else {
                format!("{fy:.3}")
            };
            let _ = writeln!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{ylabel}</text>"#,
                f.px(fx),
                HEIGHT - MARGIN + 16.0,
                MARGIN - 6.0,
                f.py(fy) + 4.0,
            );
        }
    }

    fn polyline(&mut self, s: &Series, color: &str, width: f64, dash: bool) {
        let stride = s.len().div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        let last = s.len().saturating_sub(1);
        for (k, &(x, y)) in s.iter().enumerate() {
            if (k % stride == 0 || k == last) && x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", self.frame.px(x), self.frame.py(y));
            }
        }
        let dash = if dash {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>"#,
            pts.trim_end()
        );
    }

    fn square(&mut self, (x, y): (f64, f64), color: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            self.frame.px(x) - 4.0,
            self.frame.py(y) - 4.0
        );
    }

    fn dot(&mut self, (x, y): (f64, f64)) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="black"/>"#,
            self.frame.px(x),
            self.frame.py(y)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (k, (label, color)) in entries.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * k as f64;
            let x = WIDTH - MARGIN - 150.0;
            let _ = writeln!(
                self.body,
                r#"<line x1="{x}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
                y - 4.0,
                x + 20.0,
                y - 4.0,
                x + 26.0,
                y
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn mean(vs: &[Vector]) -> Vector {
    let mut acc = Vector::zeros(vs[0].len());
    for v in vs {
        acc += v;
    }
    acc / vs.len() as f64
}

/// One agent's trace (or the reference average when `agent` is `None`).
fn trace(
    traj: &Trajectory,
    agent: Option<usize>,
    pick: fn(&SystemState) -> &Vec<Vector>,
    avg: fn(&SystemState) -> &Vec<Vector>,
) -> Series {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let v = match agent {
                Some(i) => pick(s)[i].clone(),
                None => mean(avg(s)),
            };
            if v.len() >= 2 {
                (v[0], v[1])
            } else {
                (t, v[0])
            }
        })
        .collect()
}

fn phase_plot(
    traj: &Trajectory,
    title: &str,
    pick: fn(&SystemState) -> &Vec<Vector>,
    avg: fn(&SystemState) -> &Vec<Vector>,
    sym: &str,
) -> String {
    let n = traj.states[0].agent_count();
    let p = traj.states[0].dimension();
    let agents: Vec<Series> = (0..n).map(|i| trace(traj, Some(i), pick, avg)).collect();
    let average = trace(traj, None, pick, avg);
    let mut all: Vec<&Series> = agents.iter().collect();
    all.push(&average);
    let (xl, yl) = if p >= 2 {
        (format!("{sym}_1"), format!("{sym}_2"))
    } else {
        ("t (s)".to_string(), sym.to_string())
    };
    let mut c = Canvas::new(title, &xl, &yl, Frame::fit(&all), false);
    for (i, s) in agents.iter().enumerate() {
        c.polyline(s, PALETTE[i % PALETTE.len()], 1.2, false);
    }
    c.polyline(&average, "black", 2.0, true);
    for (i, s) in agents.iter().enumerate() {
        c.square(s[0], PALETTE[i % PALETTE.len()]);
    }
    c.dot(average[0]);
    c.legend(&[("agents", PALETTE[0]), ("input average", "black")]);
    c.finish()
}

fn metrics_plot(traj: &Trajectory) -> String {
    let names = MetricSample::COLUMNS;
    let series: Vec<Series> = (0..names.len())
        .map(|k| {
            traj.times
                .iter()
                .zip(&traj.metrics)
                .map(|(&t, m)| (t, m.values()[k].max(LOG_FLOOR).log10()))
                .collect()
        })
        .collect();
    let refs: Vec<&Series> = series.iter().collect();
    let mut c = Canvas::new(
        "Tracking diagnostics",
        "t (s)",
        "value (log10)",
        Frame::fit(&refs),
        true,
    );
    for (k, s) in series.iter().enumerate() {
        c.polyline(s, PALETTE[k], 1.5, false);
    }
    let legend: Vec<(&str, &str)> = names
        .iter()
        .enumerate()
        .map(|(k, n)| (*n, PALETTE[k]))
        .collect();
    c.legend(&legend);
    c.finish()
}

/// Write `positions.svg`, `velocities.svg` and `metrics.svg` into `outdir`.
pub fn emit_plots(traj: &Trajectory, outdir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    if traj.len() < 2 {
        return Err(PlotError::TooShort(traj.len()));
    }
    let docs = [
        (
            "positions.svg",
            phase_plot(traj, "Positions", |s| &s.x, |s| &s.r, "x"),
        ),
        (
            "velocities.svg",
            phase_plot(traj, "Velocities", |s| &s.v, |s| &s.vr, "v"),
        ),
        ("metrics.svg", metrics_plot(traj)),
    ];
    let mut paths = Vec::new();
    for (name, doc) in docs {
        let path = outdir.join(name);
        fs::write(&path, doc).map_err(|source| PlotError::Write {
            path: path.display().to_string(),
            source,
        })?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gains::GainSet;
    use crate::graph::build_graph;
    use crate::sim::compute_metrics;

    fn constant_traj() -> Trajectory {
        let g = build_graph(2, &[(1, 2)]).unwrap();
        let p = vec![Vector::from_vec(vec![1.0, 1.0]); 2];
        let gains = GainSet::communication(1.0, 1.0, 1.0);
        let mut traj = Trajectory {
            times: vec![],
            states: vec![],
            metrics: vec![],
        };
        for k in 0..3 {
            let s = SystemState::new(
                k as f64,
                p.clone(),
                p.clone(),
                p.clone(),
                p.clone(),
                p.clone(),
                &g,
                1.0,
            );
            traj.metrics.push(compute_metrics(&s, &g, &gains));
            traj.times.push(k as f64);
            traj.states.push(s);
        }
        traj
    }

    #[test]
    fn constant_trajectory_renders() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_plots(&constant_traj(), dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        for p in paths {
            let text = fs::read_to_string(p).unwrap();
            assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
            assert!(!text.contains("NaN"));
        }
    }

    #[test]
    fn position_plot_marks_starts_and_average() {
        let doc = phase_plot(&constant_traj(), "Positions", |s| &s.x, |s| &s.r, "x");
        assert_eq!(doc.matches("<rect x=").count(), 2 + 1);
        assert_eq!(doc.matches("<circle").count(), 1);
    }

    #[test]
    fn single_sample_is_refused() {
        let mut t = constant_traj();
        t.times.truncate(1);
        t.states.truncate(1);
        t.metrics.truncate(1);
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_plots(&t, dir.path()),
            Err(PlotError::TooShort(1))
        ));
    }
}
