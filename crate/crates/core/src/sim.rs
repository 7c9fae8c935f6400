//! Fixed-step integration of the closed loop with tracking, conservation and
//! Lyapunov diagnostics.

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    closed_loop_rhs, zero_output_upsilon, Algorithm, DynamicsError, StateDerivative, Switching,
    SystemState,
};
use crate::gains::GainSet;
use crate::graph::Graph;
use crate::signals::InputSignal;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Self::Euler),
            "rk4" => Ok(Self::Rk4),
            other => Err(format!(
                "unknown integrator `{other}` (expected euler or rk4)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub step: f64,
    pub horizon: f64,
    pub integrator: Integrator,
    /// Keep every `record_every`-th step. The final step is always kept.
    pub record_every: usize,
    pub match_initialization: bool,
    /// Width of the saturation replacing `sgn`; 0 keeps the exact signum.
    pub boundary_layer: f64,
    pub divergence_cap: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            horizon: 20.0,
            integrator: Integrator::Rk4,
            record_every: 10,
            match_initialization: false,
            boundary_layer: 0.0,
            divergence_cap: 1e6,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::BadConfig(msg));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.step > self.horizon {
            return bad(format!(
                "step {} exceeds horizon {}",
                self.step, self.horizon
            ));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.boundary_layer >= 0.0) {
            return bad(format!(
                "boundary_layer must be non-negative, got {}",
                self.boundary_layer
            ));
        }
        if !(self.divergence_cap > 0.0) {
            return bad(format!(
                "divergence_cap must be positive, got {}",
                self.divergence_cap
            ));
        }
        Ok(())
    }

    pub fn switching(&self) -> Switching {
        Switching::from_boundary_layer(self.boundary_layer)
    }

    /// Number of integration steps; the horizon is rounded to a whole step.
    pub fn step_count(&self) -> usize {
        (self.horizon / self.step).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    /// `max_i ||x_i - mean(r)||`
    pub pos_err: f64,
    /// `max_i ||v_i - mean(v^r)||`
    pub vel_err: f64,
    /// `||sum x - sum r||`
    pub s1: f64,
    /// `||sum v - sum v^r||`
    pub s2: f64,
    pub lyapunov: f64,
    /// `max_i ||x_i - mean(x)||`
    pub consensus_err: f64,
}

impl MetricSample {
    pub const COLUMNS: [&'static str; 6] = [
        "pos_err",
        "vel_err",
        "s1",
        "s2",
        "lyapunov",
        "consensus_err",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.pos_err,
            self.vel_err,
            self.s1,
            self.s2,
            self.lyapunov,
            self.consensus_err,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub metrics: Vec<MetricSample>,
}

impl Trajectory {
    fn with_capacity(cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            metrics: Vec::with_capacity(cap),
        }
    }

    fn push(&mut self, state: SystemState, g: &Graph, gains: &GainSet) {
        self.metrics.push(compute_metrics(&state, g, gains));
        self.times.push(state.t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_metrics(&self) -> Option<&MetricSample> {
        self.metrics.first()
    }

    pub fn final_metrics(&self) -> Option<&MetricSample> {
        self.metrics.last()
    }

    pub fn final_state(&self) -> Option<&SystemState> {
        self.states.last()
    }

    /// Largest value of a metric over all samples.
    pub fn max_metric(&self, pick: impl Fn(&MetricSample) -> f64) -> f64 {
        self.metrics.iter().map(pick).fold(0.0, f64::max)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("run diverged at t = {t:.6} s: {reason}")]
    Diverged {
        t: f64,
        reason: String,
        partial: Box<Trajectory>,
    },
}

impl SimError {
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            SimError::Diverged { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Positions and velocities `x(0) = [0.1 b, -0.2 b]`, `v(0) = [0.2 b, 0.1 b]`
/// with `b = [-4, ..., 5]`.
pub fn case_initial_conditions() -> (Vec<Vector>, Vec<Vector>) {
    let b: Vec<f64> = (-4..=5).map(f64::from).collect();
    let x = b
        .iter()
        .map(|&bi| Vector::from_vec(vec![0.1 * bi, -0.2 * bi]))
        .collect();
    let v = b
        .iter()
        .map(|&bi| Vector::from_vec(vec![0.2 * bi, 0.1 * bi]))
        .collect();
    (x, v)
}

/// Build the initial closed-loop state.
///
/// With `cfg.match_initialization` the references start at the agents' own
/// positions and velocities. Otherwise they start at each signal's `r0`,
/// `v0`. `upsilon0` defaults to the values giving `w(0) = 0`.
pub fn initialize(
    g: &Graph,
    signals: &[InputSignal],
    x0: &[Vector],
    v0: &[Vector],
    upsilon0: Option<&[Vector]>,
    cfg: &SimConfig,
    gains: &GainSet,
) -> Result<SystemState, SimError> {
    let n = g.node_count();
    let p = x0.first().map_or(0, |x| x.len());
    let lens = [
        signals.len(),
        x0.len(),
        v0.len(),
        upsilon0.map_or(n, |u| u.len()),
    ];
    if lens.iter().any(|&l| l != n) {
        return Err(SimError::Dimension(format!(
            "graph has {n} agents but got {} signals, {} positions, {} velocities, {} filter states",
            lens[0], lens[1], lens[2], lens[3]
        )));
    }
    let dims_ok = x0
        .iter()
        .chain(v0)
        .chain(upsilon0.unwrap_or(&[]))
        .all(|v| v.len() == p)
        && signals.iter().all(|s| s.dimension() == p);
    if !dims_ok || p == 0 {
        return Err(SimError::Dimension(format!(
            "all per-agent vectors must have dimension {p} > 0"
        )));
    }
    if cfg.match_initialization && gains.algorithm == Algorithm::Sensing {
        warn!("matched initialization requested for Algorithm 2, which does not require it");
    }

    let (r, vr) = if cfg.match_initialization {
        (x0.to_vec(), v0.to_vec())
    } else {
        (
            signals.iter().map(|s| s.r0.clone()).collect(),
            signals.iter().map(|s| s.v0.clone()).collect(),
        )
    };
    let upsilon = match upsilon0 {
        Some(u) => u.to_vec(),
        None => zero_output_upsilon(x0, g, gains.alpha),
    };
    Ok(SystemState::new(
        0.0,
        x0.to_vec(),
        v0.to_vec(),
        upsilon,
        r,
        vr,
        g,
        gains.alpha,
    ))
}

fn step(
    state: &SystemState,
    h: f64,
    signals: &[InputSignal],
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
    integrator: Integrator,
) -> Result<SystemState, DynamicsError> {
    let alpha = gains.alpha;
    let k1 = closed_loop_rhs(state, signals, g, gains, sw)?;
    match integrator {
        Integrator::Euler => Ok(state.advanced(h, &k1, g, alpha)),
        Integrator::Rk4 => {
            let k2 = closed_loop_rhs(
                &state.advanced(0.5 * h, &k1, g, alpha),
                signals,
                g,
                gains,
                sw,
            )?;
            let k3 = closed_loop_rhs(
                &state.advanced(0.5 * h, &k2, g, alpha),
                signals,
                g,
                gains,
                sw,
            )?;
            let k4 = closed_loop_rhs(&state.advanced(h, &k3, g, alpha), signals, g, gains, sw)?;
            let d = StateDerivative::combine(&[
                (1.0 / 6.0, &k1),
                (1.0 / 3.0, &k2),
                (1.0 / 3.0, &k3),
                (1.0 / 6.0, &k4),
            ]);
            Ok(state.advanced(h, &d, g, alpha))
        }
    }
}

/// Integrate from `initial` to `cfg.horizon`.
///
/// Aborts with the trajectory recorded so far when any state norm exceeds
/// `cfg.divergence_cap` or a derivative is non-finite.
pub fn run(
    initial: SystemState,
    signals: &[InputSignal],
    g: &Graph,
    gains: &GainSet,
    cfg: &SimConfig,
) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let steps = cfg.step_count();
    let sw = cfg.switching();
    let t0 = initial.t;
    let mut traj = Trajectory::with_capacity(steps / cfg.record_every + 2);
    let mut state = initial;
    traj.push(state.clone(), g, gains);

    for k in 1..=steps {
        let diverged = |t: f64, reason: String, traj: Trajectory| SimError::Diverged {
            t,
            reason,
            partial: Box::new(traj),
        };
        let mut next = match step(&state, cfg.step, signals, g, gains, sw, cfg.integrator) {
            Ok(next) => next,
            Err(e) => return Err(diverged(state.t, e.to_string(), traj)),
        };
        // Pin time to the grid instead of accumulating h.
        next.t = t0 + k as f64 * cfg.step;
        if !next.is_finite() {
            return Err(diverged(next.t, "non-finite state".into(), traj));
        }
        let norm = next.max_norm();
        if norm > cfg.divergence_cap {
            traj.push(next.clone(), g, gains);
            return Err(diverged(
                next.t,
                format!(
                    "state norm {norm:.3e} exceeds cap {:.3e}",
                    cfg.divergence_cap
                ),
                traj,
            ));
        }
        state = next;
        if k % cfg.record_every == 0 || k == steps {
            traj.push(state.clone(), g, gains);
        }
    }
    debug!("run finished: {} samples over {} steps", traj.len(), steps);
    Ok(traj)
}

fn mean(vs: &[Vector]) -> Vector {
    sum(vs) / vs.len() as f64
}

fn sum(vs: &[Vector]) -> Vector {
    let mut acc = Vector::zeros(vs[0].len());
    for v in vs {
        acc += v;
    }
    acc
}

fn centered(vs: &[Vector]) -> Vec<Vector> {
    let m = mean(vs);
    vs.iter().map(|v| v - &m).collect()
}

fn dot(a: &[Vector], b: &[Vector]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a.dot(b)).sum()
}

/// `z^T (L kron I_p) z` as a sum over edges.
fn laplacian_form(z: &[Vector], g: &Graph) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j)| (&z[i] - &z[j]).norm_squared())
        .sum()
}

/// `1/2 [a b c] [[A, I, I], [I, I, I], [I, I, alpha I]] [a b c]^T` where the
/// top-left form is supplied.
fn block_form(top_left: f64, a: &[Vector], b: &[Vector], c: &[Vector], alpha: f64) -> f64 {
    0.5 * (top_left + dot(b, b) + alpha * dot(c, c) + 2.0 * (dot(a, b) + dot(a, c) + dot(b, c)))
}

/// Algorithm-1 Lyapunov function with `mu = 2 alpha - 1` on the centered
/// positions, velocities and filter outputs.
pub fn lyapunov1_value(state: &SystemState, g: &Graph, gains: &GainSet) -> f64 {
    let mu = 2.0 * gains.alpha - 1.0;
    let (xi_x, xi_v, xi_w) = (centered(&state.x), centered(&state.v), centered(&state.w));
    block_form(
        mu * laplacian_form(&xi_x, g),
        &xi_x,
        &xi_v,
        &xi_w,
        gains.alpha,
    )
}

/// Algorithm-2 Lyapunov function with `mu1 = 2 alpha - 1`, `mu2 = 2 kappa`;
/// the filter outputs enter uncentered.
pub fn lyapunov2_value(state: &SystemState, g: &Graph, gains: &GainSet) -> f64 {
    let mu1 = 2.0 * gains.alpha - 1.0;
    let mu2 = 2.0 * gains.kappa.unwrap_or(0.0);
    let (xi_x, xi_v) = (centered(&state.x), centered(&state.v));
    let top = mu1 * laplacian_form(&xi_x, g) + mu2 * dot(&xi_x, &xi_x);
    block_form(top, &xi_x, &xi_v, &state.w, gains.alpha)
}

fn max_deviation(vs: &[Vector], target: &Vector) -> f64 {
    vs.iter().map(|v| (v - target).norm()).fold(0.0, f64::max)
}

/// Tracking errors, sum errors, the active Lyapunov value and the consensus
/// spread of one state.
pub fn compute_metrics(state: &SystemState, g: &Graph, gains: &GainSet) -> MetricSample {
    let lyapunov = match gains.algorithm {
        Algorithm::Communication => lyapunov1_value(state, g, gains),
        Algorithm::Sensing => lyapunov2_value(state, g, gains),
    };
    MetricSample {
        pos_err: max_deviation(&state.x, &mean(&state.r)),
        vel_err: max_deviation(&state.v, &mean(&state.vr)),
        s1: (sum(&state.x) - sum(&state.r)).norm(),
        s2: (sum(&state.v) - sum(&state.vr)).norm(),
        lyapunov,
        consensus_err: max_deviation(&state.x, &mean(&state.x)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gains::synthesize_gains_alg1;
    use crate::graph::{build_graph, canonical_ten_node_graph, spectrum, EIGEN_TOL};
    use crate::signals::{make_case1_signal, SignalProfile, SignalTerm, TermKind};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    fn still_signal(agent: usize) -> InputSignal {
        let zero = SignalTerm::new(TermKind::Constant, 0.0, 0.0, false);
        let profile = SignalProfile::new(vec![vec![zero], vec![zero]]).unwrap();
        InputSignal::new(agent, profile, v2(0.0, 0.0), v2(0.0, 0.0)).unwrap()
    }

    fn random_vecs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vector> {
        (0..n)
            .map(|_| v2(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            .collect()
    }

    fn random_state(rng: &mut ChaCha8Rng, g: &Graph, alpha: f64) -> SystemState {
        let n = g.node_count();
        SystemState::new(
            0.0,
            random_vecs(rng, n),
            random_vecs(rng, n),
            random_vecs(rng, n),
            random_vecs(rng, n),
            random_vecs(rng, n),
            g,
            alpha,
        )
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let cases = [
            SimConfig {
                step: 0.0,
                ..Default::default()
            },
            SimConfig {
                step: 30.0,
                ..Default::default()
            },
            SimConfig {
                record_every: 0,
                ..Default::default()
            },
            SimConfig {
                boundary_layer: -1.0,
                ..Default::default()
            },
        ];
        for cfg in cases {
            assert!(matches!(cfg.validate(), Err(SimError::BadConfig(_))));
        }
        assert_eq!("RK4".parse::<Integrator>().unwrap(), Integrator::Rk4);
    }

    #[test]
    fn case_initial_conditions_first_agent() {
        let (x, v) = case_initial_conditions();
        assert_eq!(x.len(), 10);
        assert_abs_diff_eq!(x[0][0], -0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(x[0][1], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0][0], -0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0][1], -0.4, epsilon = 1e-15);
    }

    #[test]
    fn matched_initialization_zeroes_sum_errors() {
        let g = canonical_ten_node_graph();
        let signals: Vec<_> = (1..=10).map(make_case1_signal).collect();
        let (x, v) = case_initial_conditions();
        let cfg = SimConfig {
            match_initialization: true,
            ..Default::default()
        };
        let gains = GainSet::communication(20.0, 400.0, 5.0);
        let s = initialize(&g, &signals, &x, &v, None, &cfg, &gains).unwrap();
        let m = compute_metrics(&s, &g, &gains);
        assert_eq!(m.s1, 0.0);
        assert_eq!(m.s2, 0.0);
        assert!(s.w.iter().all(|w| w.norm() < 1e-14));
    }

    #[test]
    fn initialize_rejects_wrong_lengths() {
        let g = build_graph(2, &[(1, 2)]).unwrap();
        let signals = vec![still_signal(1), still_signal(2)];
        let gains = GainSet::communication(1.0, 1.0, 1.0);
        let x = vec![v2(0.0, 0.0)];
        let err = initialize(&g, &signals, &x, &x, None, &SimConfig::default(), &gains);
        assert!(matches!(err, Err(SimError::Dimension(_))));
    }

    #[test]
    fn free_motion_is_integrated_exactly() {
        let g = build_graph(1, &[]).unwrap();
        let signals = vec![still_signal(1)];
        let gains = GainSet::communication(0.0, 0.0, 0.0);
        let c = v2(0.3, -1.7);
        for integrator in [Integrator::Euler, Integrator::Rk4] {
            let cfg = SimConfig {
                horizon: 2.0,
                step: 0.01,
                integrator,
                record_every: 1,
                ..Default::default()
            };
            let s0 = initialize(
                &g,
                &signals,
                &[v2(1.0, 2.0)],
                std::slice::from_ref(&c),
                None,
                &cfg,
                &gains,
            )
            .unwrap();
            let traj = run(s0, &signals, &g, &gains, &cfg).unwrap();
            assert_eq!(traj.len(), 201);
            for (t, s) in traj.times.iter().zip(&traj.states) {
                assert_abs_diff_eq!(s.x[0][0], 1.0 + 0.3 * t, epsilon = 1e-12);
                assert_abs_diff_eq!(s.x[0][1], 2.0 - 1.7 * t, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn times_strictly_increase_and_final_step_is_kept() {
        let g = build_graph(1, &[]).unwrap();
        let signals = vec![still_signal(1)];
        let gains = GainSet::communication(0.0, 0.0, 0.0);
        let cfg = SimConfig {
            horizon: 1.0,
            step: 0.1,
            record_every: 3,
            ..Default::default()
        };
        let s0 = initialize(
            &g,
            &signals,
            &[v2(0.0, 0.0)],
            &[v2(1.0, 0.0)],
            None,
            &cfg,
            &gains,
        )
        .unwrap();
        let traj = run(s0, &signals, &g, &gains, &cfg).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_abs_diff_eq!(*traj.times.last().unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(traj.len(), traj.metrics.len());
    }

    #[test]
    fn divergence_aborts_with_partial_trajectory() {
        let g = build_graph(1, &[]).unwrap();
        let signals = vec![still_signal(1)];
        let gains = GainSet::communication(0.0, 0.0, 0.0);
        let cfg = SimConfig {
            horizon: 10.0,
            step: 0.01,
            record_every: 1,
            divergence_cap: 5.0,
            ..Default::default()
        };
        let s0 = initialize(
            &g,
            &signals,
            &[v2(0.0, 0.0)],
            &[v2(1.0, 0.0)],
            None,
            &cfg,
            &gains,
        )
        .unwrap();
        match run(s0, &signals, &g, &gains, &cfg) {
            Err(SimError::Diverged { t, partial, .. }) => {
                assert!(t > 4.0 && t < 5.1, "t = {t}");
                assert!(!partial.is_empty());
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn metric_hand_example() {
        let g = build_graph(2, &[(1, 2)]).unwrap();
        let z = v2(0.0, 0.0);
        let s = SystemState::new(
            0.0,
            vec![v2(1.0, 0.0), z.clone()],
            vec![z.clone(), z.clone()],
            vec![z.clone(), z.clone()],
            vec![z.clone(), z.clone()],
            vec![z.clone(), z.clone()],
            &g,
            1.0,
        );
        let m = compute_metrics(&s, &g, &GainSet::communication(1.0, 1.0, 1.0));
        assert_eq!(m.pos_err, 1.0);
        assert_eq!(m.s1, 1.0);
        assert_eq!(m.s2, 0.0);
        assert_eq!(m.consensus_err, 0.5);
    }

    #[test]
    fn consensus_error_ignores_references() {
        let g = build_graph(3, &[(1, 2), (2, 3)]).unwrap();
        let p = v2(2.0, -1.0);
        let x = vec![p.clone(), p.clone(), p.clone()];
        let r = vec![v2(5.0, 5.0), v2(-3.0, 1.0), v2(0.0, 9.0)];
        let s = SystemState::new(0.0, x.clone(), x.clone(), x.clone(), r.clone(), r, &g, 1.0);
        let m = compute_metrics(&s, &g, &GainSet::communication(1.0, 1.0, 1.0));
        assert_eq!(m.consensus_err, 0.0);
        assert!(m.pos_err > 0.0);
    }

    #[test]
    fn lyapunov_vanishes_at_consensus() {
        let g = canonical_ten_node_graph();
        let p = v2(0.7, -0.2);
        let same = vec![p; 10];
        let zeros = vec![v2(0.0, 0.0); 10];
        let s = SystemState::new(
            0.0,
            same.clone(),
            same.clone(),
            zeros.clone(),
            same.clone(),
            same,
            &g,
            2.0,
        );
        assert_abs_diff_eq!(
            lyapunov1_value(&s, &g, &GainSet::communication(2.0, 1.0, 1.0)),
            0.0,
            epsilon = 1e-24
        );
        assert_abs_diff_eq!(
            lyapunov2_value(&s, &g, &GainSet::sensing(2.0, 4.0, 1.0, 1.0)),
            0.0,
            epsilon = 1e-24
        );
    }

    #[test]
    fn lyapunov_is_nonnegative_for_admissible_gains() {
        let g = canonical_ten_node_graph();
        let spec = spectrum(&g, EIGEN_TOL).unwrap();
        let g1 = synthesize_gains_alg1(&spec, 10, 1.0, 1.1).unwrap();
        let g2 = GainSet::sensing(1.1, 1.1 * 10f64.sqrt(), 100.0, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s1 = random_state(&mut rng, &g, g1.alpha);
            assert!(lyapunov1_value(&s1, &g, &g1) >= 0.0);
            let s2 = random_state(&mut rng, &g, g2.alpha);
            assert!(lyapunov2_value(&s2, &g, &g2) >= 0.0);
        }
    }

    #[test]
    fn lyapunov_is_quadratic() {
        let g = canonical_ten_node_graph();
        let g1 = GainSet::communication(20.0, 400.0, 5.0);
        let g2 = GainSet::sensing(2.0, 10.0, 450.0, 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            for gains in [&g1, &g2] {
                let s = random_state(&mut rng, &g, gains.alpha);
                let dbl = |vs: &[Vector]| vs.iter().map(|v| v * 2.0).collect::<Vec<_>>();
                let s2 = SystemState::new(
                    0.0,
                    dbl(&s.x),
                    dbl(&s.v),
                    dbl(&s.upsilon),
                    s.r.clone(),
                    s.vr.clone(),
                    &g,
                    gains.alpha,
                );
                let (a, b) = match gains.algorithm {
                    Algorithm::Communication => (
                        lyapunov1_value(&s, &g, gains),
                        lyapunov1_value(&s2, &g, gains),
                    ),
                    Algorithm::Sensing => (
                        lyapunov2_value(&s, &g, gains),
                        lyapunov2_value(&s2, &g, gains),
                    ),
                };
                assert_abs_diff_eq!(b, 4.0 * a, epsilon = 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_agent_fixed_point_without_input() {
        // A lone agent on a reference resting at the origin, with w = 0, stays
        // there. Any nonzero r feeds the filter through -kappa r.
        let g = build_graph(1, &[]).unwrap();
        let signals = vec![still_signal(1)];
        let gains = GainSet::sensing(2.0, 2.0, 10.0, 1.0);
        let cfg = SimConfig {
            horizon: 10.0,
            match_initialization: true,
            ..Default::default()
        };
        let s0 = initialize(
            &g,
            &signals,
            &[v2(0.0, 0.0)],
            &[v2(0.0, 0.0)],
            None,
            &cfg,
            &gains,
        )
        .unwrap();
        let traj = run(s0, &signals, &g, &gains, &cfg).unwrap();
        assert!(traj.max_metric(|m| m.pos_err) < 1e-6);
    }

    #[test]
    fn single_agent_with_moving_reference_leaves_the_fixed_point() {
        // The filter is driven by -kappa (r + v^r) - a^r even at w = 0, so a
        // moving lone reference is not an equilibrium.
        let g = build_graph(1, &[]).unwrap();
        let signals = vec![crate::signals::make_case2_signal(1)];
        let gains = GainSet::sensing(2.0, 2.0, 10.0, 1.0);
        let cfg = SimConfig {
            horizon: 10.0,
            match_initialization: true,
            ..Default::default()
        };
        let s0 = initialize(
            &g,
            &signals,
            &[v2(0.0, 0.0)],
            &[v2(-0.1, -0.1)],
            None,
            &cfg,
            &gains,
        )
        .unwrap();
        let traj = run(s0, &signals, &g, &gains, &cfg).unwrap();
        assert!(traj.max_metric(|m| m.pos_err) > 1e-3);
    }

    #[test]
    fn metrics_are_nonnegative_along_a_run() {
        let g = canonical_ten_node_graph();
        let signals: Vec<_> = (1..=10).map(make_case1_signal).collect();
        let (x, v) = case_initial_conditions();
        let cfg = SimConfig {
            horizon: 1.0,
            match_initialization: true,
            ..Default::default()
        };
        let gains = GainSet::communication(20.0, 400.0, 5.0);
        let s0 = initialize(&g, &signals, &x, &v, None, &cfg, &gains).unwrap();
        let traj = run(s0, &signals, &g, &gains, &cfg).unwrap();
        assert!(traj
            .metrics
            .iter()
            .all(|m| m.values().iter().all(|&c| c >= 0.0)));
    }
}
