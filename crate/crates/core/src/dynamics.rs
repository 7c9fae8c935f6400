//! Filters, control laws and the assembled closed-loop right-hand side.
//!
//! Agent indices in this module are 0-based. All neighbor sums run over the
//! graph's neighbor lists.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gains::GainSet;
use crate::graph::Graph;
use crate::signals::InputSignal;
use crate::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("non-finite derivative for agent {agent} at t = {t}")]
    NonFinite { agent: usize, t: f64 },
    #[error("state has {got} agents, graph has {expected}")]
    AgentCount { expected: usize, got: usize },
    #[error("Algorithm 2 gains need kappa")]
    MissingKappa,
}

/// Which filter/control pair drives the agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Algorithm {
    /// Algorithm 1: relative positions plus neighbors' filter outputs over
    /// communication; no velocity measurements; needs matched initialization.
    Communication,
    /// Algorithm 2: relative positions plus own velocity; no communication;
    /// initialization-free.
    Sensing,
}

impl Algorithm {
    pub fn number(self) -> u8 {
        match self {
            Algorithm::Communication => 1,
            Algorithm::Sensing => 2,
        }
    }
}

impl TryFrom<u8> for Algorithm {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Algorithm::Communication),
            2 => Ok(Algorithm::Sensing),
            other => Err(format!("algorithm must be 1 or 2, got {other}")),
        }
    }
}

impl From<Algorithm> for u8 {
    fn from(a: Algorithm) -> u8 {
        a.number()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Realization of the discontinuous `sgn` terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Switching {
    /// Exact signum with `sgn(0) = 0`.
    Signum,
    /// `clamp(z / eps, -1, 1)`.
    BoundaryLayer(f64),
}

impl Switching {
    /// `0` selects the exact signum.
    pub fn from_boundary_layer(eps: f64) -> Self {
        if eps > 0.0 {
            Switching::BoundaryLayer(eps)
        } else {
            Switching::Signum
        }
    }

    pub fn scalar(self, z: f64) -> f64 {
        match self {
            Switching::Signum => signum(z),
            Switching::BoundaryLayer(eps) => (z / eps).clamp(-1.0, 1.0),
        }
    }

    pub fn apply(self, z: &Vector) -> Vector {
        z.map(|c| self.scalar(c))
    }
}

/// Componentwise signum with `sgn(0) = 0`.
pub fn signum(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub x: Vector,
    pub v: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub upsilon: Vector,
    /// Filter output; derived from `upsilon` and neighbor positions.
    pub w: Vector,
}

/// Full closed-loop state, stored per quantity. `w` is never integrated: it is
/// recomputed from `upsilon` whenever the state is built or advanced.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub x: Vec<Vector>,
    pub v: Vec<Vector>,
    pub upsilon: Vec<Vector>,
    pub w: Vec<Vector>,
    pub r: Vec<Vector>,
    pub vr: Vec<Vector>,
}

/// Time derivative of the integrated parts of a [`SystemState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub dx: Vec<Vector>,
    pub dv: Vec<Vector>,
    pub dupsilon: Vec<Vector>,
    pub dr: Vec<Vector>,
    pub dvr: Vec<Vector>,
}

impl SystemState {
    /// Assemble a state and compute the filter outputs.
    pub fn new(
        t: f64,
        x: Vec<Vector>,
        v: Vec<Vector>,
        upsilon: Vec<Vector>,
        r: Vec<Vector>,
        vr: Vec<Vector>,
        g: &Graph,
        alpha: f64,
    ) -> Self {
        let w = filter_outputs(&upsilon, &x, g, alpha);
        Self {
            t,
            x,
            v,
            upsilon,
            w,
            r,
            vr,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.x.len()
    }

    pub fn dimension(&self) -> usize {
        self.x.first().map_or(0, |x| x.len())
    }

    pub fn agent(&self, i: usize) -> AgentState {
        AgentState {
            x: self.x[i].clone(),
            v: self.v[i].clone(),
        }
    }

    pub fn filter(&self, i: usize) -> FilterState {
        FilterState {
            upsilon: self.upsilon[i].clone(),
            w: self.w[i].clone(),
        }
    }

    /// `self + h * d` at time `t + h`, with fresh filter outputs.
    pub fn advanced(&self, h: f64, d: &StateDerivative, g: &Graph, alpha: f64) -> Self {
        let step = |a: &[Vector], b: &[Vector]| -> Vec<Vector> {
            a.iter().zip(b).map(|(a, b)| a + b * h).collect()
        };
        Self::new(
            self.t + h,
            step(&self.x, &d.dx),
            step(&self.v, &d.dv),
            step(&self.upsilon, &d.dupsilon),
            step(&self.r, &d.dr),
            step(&self.vr, &d.dvr),
            g,
            alpha,
        )
    }

    /// Largest Euclidean norm of any per-agent vector in the state.
    pub fn max_norm(&self) -> f64 {
        [&self.x, &self.v, &self.upsilon, &self.r, &self.vr]
            .iter()
            .flat_map(|vs| vs.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        [&self.x, &self.v, &self.upsilon, &self.r, &self.vr]
            .iter()
            .flat_map(|vs| vs.iter())
            .all(|v| v.iter().all(|c| c.is_finite()))
    }
}

impl StateDerivative {
    /// Weighted sum `sum_k c_k d_k`, used to combine Runge-Kutta stages.
    pub fn combine(parts: &[(f64, &StateDerivative)]) -> StateDerivative {
        let (c0, first) = parts[0];
        let mix = |pick: fn(&StateDerivative) -> &Vec<Vector>| -> Vec<Vector> {
            let mut acc: Vec<Vector> = pick(first).iter().map(|v| v * c0).collect();
            for &(c, d) in &parts[1..] {
                for (a, b) in acc.iter_mut().zip(pick(d)) {
                    a.axpy(c, b, 1.0);
                }
            }
            acc
        };
        StateDerivative {
            dx: mix(|d| &d.dx),
            dv: mix(|d| &d.dv),
            dupsilon: mix(|d| &d.dupsilon),
            dr: mix(|d| &d.dr),
            dvr: mix(|d| &d.dvr),
        }
    }
}

/// `sum_{j in N_i} (x_i - x_j)`.
pub fn relative_position_sum(i: usize, x: &[Vector], g: &Graph) -> Vector {
    let mut sum = Vector::zeros(x[i].len());
    for &j in g.neighbors(i) {
        sum += &x[i] - &x[j];
    }
    sum
}

/// Algorithm-1 filter output `w_i = upsilon_i - alpha sum_{j in N_i}(x_i - x_j)`.
pub fn filter1_output(i: usize, upsilon_i: &Vector, x: &[Vector], g: &Graph, alpha: f64) -> Vector {
    upsilon_i - relative_position_sum(i, x, g) * alpha
}

/// Algorithm-2 filter output. Same expression as [`filter1_output`].
pub fn filter2_output(i: usize, upsilon_i: &Vector, x: &[Vector], g: &Graph, alpha: f64) -> Vector {
    filter1_output(i, upsilon_i, x, g, alpha)
}

/// Filter outputs for every agent.
pub fn filter_outputs(upsilon: &[Vector], x: &[Vector], g: &Graph, alpha: f64) -> Vec<Vector> {
    upsilon
        .iter()
        .enumerate()
        .map(|(i, u)| filter1_output(i, u, x, g, alpha))
        .collect()
}

/// Filter initial condition giving `w_i(0) = 0`.
pub fn zero_output_upsilon(x: &[Vector], g: &Graph, alpha: f64) -> Vec<Vector> {
    (0..x.len())
        .map(|i| relative_position_sum(i, x, g) * alpha)
        .collect()
}

/// Neighbor coupling of Algorithm 1:
/// `(sum (x_i - x_j), sum (w_i - w_j), sum sgn(w_i - w_j))`.
fn communication_sums(
    i: usize,
    x: &[Vector],
    w: &[Vector],
    g: &Graph,
    sw: Switching,
) -> (Vector, Vector, Vector) {
    let p = x[i].len();
    let (mut dx, mut dw, mut sg) = (Vector::zeros(p), Vector::zeros(p), Vector::zeros(p));
    for &j in g.neighbors(i) {
        dx += &x[i] - &x[j];
        let diff = &w[i] - &w[j];
        sg += sw.apply(&diff);
        dw += diff;
    }
    (dx, dw, sg)
}

fn filter1_rate(
    i: usize,
    x: &[Vector],
    w: &[Vector],
    accel: &Vector,
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Vector {
    let (dx, dw, sg) = communication_sums(i, x, w, g, sw);
    dx - dw * gains.beta - sg * gains.gamma - accel
}

fn control1_value(
    i: usize,
    x: &[Vector],
    w: &[Vector],
    accel: &Vector,
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Vector {
    let (dx, dw, sg) = communication_sums(i, x, w, g, sw);
    dx * (-gains.alpha) + dw * gains.beta + sg * gains.gamma + accel
}

/// Algorithm-1 filter rate
/// `sum (x_i - x_j) - beta sum (w_i - w_j) - gamma sum sgn(w_i - w_j) - a_i^r`.
pub fn filter1_derivative(
    i: usize,
    state: &SystemState,
    accel_i: &Vector,
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Vector {
    filter1_rate(i, &state.x, &state.w, accel_i, g, gains, sw)
}

/// Algorithm-1 control
/// `-alpha sum (x_i - x_j) + beta sum (w_i - w_j) + gamma sum sgn(w_i - w_j) + a_i^r`.
pub fn control1(
    i: usize,
    state: &SystemState,
    accel_i: &Vector,
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Vector {
    control1_value(i, &state.x, &state.w, accel_i, g, gains, sw)
}

fn filter2_rate(
    i: usize,
    x: &[Vector],
    w_i: &Vector,
    r_i: &Vector,
    vr_i: &Vector,
    accel: &Vector,
    g: &Graph,
    gains: &GainSet,
    kappa: f64,
    sw: Switching,
) -> Vector {
    relative_position_sum(i, x, g)
        - w_i * gains.beta
        - sw.apply(w_i) * gains.gamma
        - r_i * kappa
        - vr_i * kappa
        - accel
}

#[allow(clippy::too_many_arguments)]
fn control2_value(
    i: usize,
    x: &[Vector],
    v_i: &Vector,
    w_i: &Vector,
    r_i: &Vector,
    vr_i: &Vector,
    accel: &Vector,
    g: &Graph,
    gains: &GainSet,
    kappa: f64,
    sw: Switching,
) -> Vector {
    (&x[i] - r_i) * (-kappa) - (v_i - vr_i) * kappa - relative_position_sum(i, x, g) * gains.alpha
        + w_i * gains.beta
        + sw.apply(w_i) * gains.gamma
        + accel
}

fn kappa_of(gains: &GainSet) -> Result<f64, DynamicsError> {
    gains.kappa.ok_or(DynamicsError::MissingKappa)
}

/// Algorithm-2 filter rate
/// `sum (x_i - x_j) - beta w_i - gamma sgn(w_i) - kappa r_i - kappa v_i^r - a_i^r`.
/// The signum acts on `w_i` itself.
pub fn filter2_derivative(
    i: usize,
    state: &SystemState,
    accel_i: &Vector,
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Result<Vector, DynamicsError> {
    let kappa = kappa_of(gains)?;
    Ok(filter2_rate(
        i,
        &state.x,
        &state.w[i],
        &state.r[i],
        &state.vr[i],
        accel_i,
        g,
        gains,
        kappa,
        sw,
    ))
}

/// Algorithm-2 control
/// `-kappa (x_i - r_i) - kappa (v_i - v_i^r) - alpha sum (x_i - x_j) + beta w_i + gamma sgn(w_i) + a_i^r`.
pub fn control2(
    i: usize,
    state: &SystemState,
    accel_i: &Vector,
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Result<Vector, DynamicsError> {
    let kappa = kappa_of(gains)?;
    Ok(control2_value(
        i,
        &state.x,
        &state.v[i],
        &state.w[i],
        &state.r[i],
        &state.vr[i],
        accel_i,
        g,
        gains,
        kappa,
        sw,
    ))
}

/// Input accelerations of every agent at time `t`.
pub fn input_accels(signals: &[InputSignal], t: f64) -> Vec<Vector> {
    signals.iter().map(|s| s.accel(t)).collect()
}

/// The closed loop: `dx = v`, `dv = u`, `dupsilon` from the filter,
/// `dr = v^r`, `dv^r = a^r`, for the algorithm the gains target.
///
/// Filter outputs are recomputed from `upsilon` here rather than read from
/// `state.w`.
pub fn closed_loop_rhs(
    state: &SystemState,
    signals: &[InputSignal],
    g: &Graph,
    gains: &GainSet,
    sw: Switching,
) -> Result<StateDerivative, DynamicsError> {
    let n = g.node_count();
    if state.agent_count() != n || signals.len() != n {
        return Err(DynamicsError::AgentCount {
            expected: n,
            got: state.agent_count().min(signals.len()),
        });
    }
    let accels = input_accels(signals, state.t);
    let w = filter_outputs(&state.upsilon, &state.x, g, gains.alpha);

    let mut dv = Vec::with_capacity(n);
    let mut dupsilon = Vec::with_capacity(n);
    match gains.algorithm {
        Algorithm::Communication => {
            for (i, a) in accels.iter().enumerate() {
                dv.push(control1_value(i, &state.x, &w, a, g, gains, sw));
                dupsilon.push(filter1_rate(i, &state.x, &w, a, g, gains, sw));
            }
        }
        Algorithm::Sensing => {
            let kappa = kappa_of(gains)?;
            for i in 0..n {
                dv.push(control2_value(
                    i,
                    &state.x,
                    &state.v[i],
                    &w[i],
                    &state.r[i],
                    &state.vr[i],
                    &accels[i],
                    g,
                    gains,
                    kappa,
                    sw,
                ));
                dupsilon.push(filter2_rate(
                    i,
                    &state.x,
                    &w[i],
                    &state.r[i],
                    &state.vr[i],
                    &accels[i],
                    g,
                    gains,
                    kappa,
                    sw,
                ));
            }
        }
    }

    for i in 0..n {
        let finite = dv[i]
            .iter()
            .chain(dupsilon[i].iter())
            .chain(accels[i].iter())
            .all(|c| c.is_finite());
        if !finite {
            return Err(DynamicsError::NonFinite {
                agent: i,
                t: state.t,
            });
        }
    }

    Ok(StateDerivative {
        dx: state.v.clone(),
        dv,
        dupsilon,
        dr: state.vr.clone(),
        dvr: accels,
    })
}
