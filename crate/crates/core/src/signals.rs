//! Per-agent time-varying input signals and the suprema the gain conditions
//! need.
//!
//! Each agent `i` (1-based label) owns a reference `r_i` with
//! `dr_i/dt = v_i^r` and `dv_i^r/dt = a_i^r(t)`. Only the acceleration is
//! generated in closed form; position and velocity are integrated alongside the
//! agents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("no signals given")]
    Empty,
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("grid step must be positive, got {0}")]
    BadGridStep(f64),
    #[error("safety factor must be at least 1, got {0}")]
    BadSafety(f64),
    #[error("sawtooth term needs a positive frequency, got {0}")]
    BadSawtooth(f64),
    #[error("signal dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Right-continuous sawtooth `t - period * floor(t / period)`.
pub fn sawtooth(t: f64, period: f64) -> f64 {
    t - period * (t / period).floor()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// `amplitude * sin(frequency * t)`
    Sin,
    /// `amplitude * cos(frequency * t)`
    Cos,
    /// `amplitude * mod(t, 1 / frequency)`
    Sawtooth,
    /// `amplitude`
    Constant,
}

/// One additive term of an acceleration axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalTerm {
    pub kind: TermKind,
    pub amplitude: f64,
    /// Angular frequency (rad/s) for `sin`/`cos`; inverse period for
    /// `sawtooth`; ignored for `constant`.
    #[serde(default)]
    pub frequency: f64,
    /// Multiply the term by the agent's 1-based label.
    #[serde(default)]
    pub per_agent_scale: bool,
}

impl SignalTerm {
    pub fn new(kind: TermKind, amplitude: f64, frequency: f64, per_agent_scale: bool) -> Self {
        Self {
            kind,
            amplitude,
            frequency,
            per_agent_scale,
        }
    }

    pub fn eval(&self, t: f64, agent: usize) -> f64 {
        let shape = match self.kind {
            TermKind::Sin => (self.frequency * t).sin(),
            TermKind::Cos => (self.frequency * t).cos(),
            TermKind::Sawtooth => sawtooth(t, 1.0 / self.frequency),
            TermKind::Constant => 1.0,
        };
        let scale = if self.per_agent_scale {
            agent as f64
        } else {
            1.0
        };
        self.amplitude * scale * shape
    }
}

/// Acceleration profile shared by a family of agents: one term list per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalProfile {
    pub axes: Vec<Vec<SignalTerm>>,
}

impl SignalProfile {
    pub fn new(axes: Vec<Vec<SignalTerm>>) -> Result<Self, SignalError> {
        for term in axes.iter().flatten() {
            if term.kind == TermKind::Sawtooth && !(term.frequency > 0.0) {
                return Err(SignalError::BadSawtooth(term.frequency));
            }
        }
        Ok(Self { axes })
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn accel(&self, t: f64, agent: usize) -> Vector {
        Vector::from_iterator(
            self.axes.len(),
            self.axes
                .iter()
                .map(|terms| terms.iter().map(|term| term.eval(t, agent)).sum::<f64>()),
        )
    }

    /// `[0.1 (sin 5t + mod(t,2)) i, 0.1 (cos 5t + mod(t,2)) i]`
    pub fn case1() -> Self {
        let saw = SignalTerm::new(TermKind::Sawtooth, 0.1, 0.5, true);
        Self {
            axes: vec![
                vec![SignalTerm::new(TermKind::Sin, 0.1, 5.0, true), saw],
                vec![SignalTerm::new(TermKind::Cos, 0.1, 5.0, true), saw],
            ],
        }
    }

    /// `[0.1 sin(t) i, 0.1 cos(t) i]`
    pub fn case2() -> Self {
        Self {
            axes: vec![
                vec![SignalTerm::new(TermKind::Sin, 0.1, 1.0, true)],
                vec![SignalTerm::new(TermKind::Cos, 0.1, 1.0, true)],
            ],
        }
    }
}

/// The input signal of one agent: a pure acceleration generator plus the
/// initial reference position and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal {
    /// 1-based label; the per-agent scale factor.
    pub agent: usize,
    pub profile: SignalProfile,
    pub r0: Vector,
    pub v0: Vector,
}

impl InputSignal {
    pub fn new(
        agent: usize,
        profile: SignalProfile,
        r0: Vector,
        v0: Vector,
    ) -> Result<Self, SignalError> {
        let p = profile.dimension();
        for len in [r0.len(), v0.len()] {
            if len != p {
                return Err(SignalError::Dimension {
                    expected: p,
                    got: len,
                });
            }
        }
        Ok(Self {
            agent,
            profile,
            r0,
            v0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.profile.dimension()
    }

    pub fn accel(&self, t: f64) -> Vector {
        self.profile.accel(t, self.agent)
    }
}

/// Case-1 signal of agent `i`. Initial reference state is zero; scenarios
/// normally overwrite it through matched initialization.
pub fn make_case1_signal(i: usize) -> InputSignal {
    assert!(i >= 1, "agent labels are 1-based");
    InputSignal {
        agent: i,
        profile: SignalProfile::case1(),
        r0: Vector::zeros(2),
        v0: Vector::zeros(2),
    }
}

/// Case-2 signal of agent `i`: `r_i(0) = 0`, `v_i^r(0) = (-0.1 i, -0.1 i)`.
pub fn make_case2_signal(i: usize) -> InputSignal {
    assert!(i >= 1, "agent labels are 1-based");
    let v = -0.1 * i as f64;
    InputSignal {
        agent: i,
        profile: SignalProfile::case2(),
        r0: Vector::zeros(2),
        v0: Vector::from_vec(vec![v, v]),
    }
}

/// Grid-sampled suprema, already inflated by `safety`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalBounds {
    /// Largest pairwise acceleration deviation `||a_i - a_j||`.
    pub a_bar_d: f64,
    pub r_bar: f64,
    pub v_bar: f64,
    pub a_bar: f64,
    pub horizon: f64,
    pub grid_step: f64,
    pub safety: f64,
}

impl SignalBounds {
    /// Bounds known in closed form rather than sampled.
    pub fn exact(a_bar_d: f64, r_bar: f64, v_bar: f64, a_bar: f64) -> Self {
        Self {
            a_bar_d,
            r_bar,
            v_bar,
            a_bar,
            horizon: f64::INFINITY,
            grid_step: 0.0,
            safety: 1.0,
        }
    }
}

/// One classical RK4 step of the reference double integrator.
pub fn reference_rk4_step(
    signal: &InputSignal,
    t: f64,
    h: f64,
    r: &Vector,
    v: &Vector,
) -> (Vector, Vector) {
    let a1 = signal.accel(t);
    let a2 = signal.accel(t + 0.5 * h);
    let a4 = signal.accel(t + h);
    // Position stages: k_r1 = v, k_r2 = v + h/2 a1, k_r3 = v + h/2 a2, k_r4 = v + h a3 (a3 = a2).
    let r_next = r + v * h + (&a1 + &a2 * 2.0) * (h * h / 6.0);
    let v_next = v + (&a1 + &a2 * 4.0 + &a4) * (h / 6.0);
    (r_next, v_next)
}

/// Estimate the suprema over `[0, horizon]` on a grid of spacing `grid_step`
/// and multiply each by `safety`. References are integrated with RK4 on the
/// same grid.
pub fn estimate_bounds(
    signals: &[InputSignal],
    horizon: f64,
    grid_step: f64,
    safety: f64,
) -> Result<SignalBounds, SignalError> {
    if signals.is_empty() {
        return Err(SignalError::Empty);
    }
    if !(horizon > 0.0) {
        return Err(SignalError::BadHorizon(horizon));
    }
    if !(grid_step > 0.0) {
        return Err(SignalError::BadGridStep(grid_step));
    }
    if !(safety >= 1.0) {
        return Err(SignalError::BadSafety(safety));
    }
    let steps = (horizon / grid_step).ceil() as usize;

    let mut refs: Vec<(Vector, Vector)> = signals
        .iter()
        .map(|s| (s.r0.clone(), s.v0.clone()))
        .collect();
    let (mut a_bar_d, mut r_bar, mut v_bar, mut a_bar) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..=steps {
        let t = k as f64 * grid_step;
        let accels: Vec<Vector> = signals.iter().map(|s| s.accel(t)).collect();
        for (i, ai) in accels.iter().enumerate() {
            a_bar = a_bar.max(ai.norm());
            for aj in &accels[i + 1..] {
                a_bar_d = a_bar_d.max((ai - aj).norm());
            }
        }
        for (r, v) in &refs {
            r_bar = r_bar.max(r.norm());
            v_bar = v_bar.max(v.norm());
        }
        if k < steps {
            for (s, (r, v)) in signals.iter().zip(refs.iter_mut()) {
                let (rn, vn) = reference_rk4_step(s, t, grid_step, r, v);
                *r = rn;
                *v = vn;
            }
        }
    }

    Ok(SignalBounds {
        a_bar_d: safety * a_bar_d,
        r_bar: safety * r_bar,
        v_bar: safety * v_bar,
        a_bar: safety * a_bar,
        horizon,
        grid_step,
        safety,
    })
}
