//! Gain synthesis and verification against the sufficient conditions for
//! average tracking.
//!
//! Every strict lower bound is met by multiplying it with a `margin > 1`.
//! Verification recomputes each bound, reports both sides, and spot-checks
//! negative definiteness of the scalar-block matrices that bound the Lyapunov
//! derivative.

use std::fmt;

use nalgebra::{Complex, DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Algorithm;
use crate::graph::Spectrum;
use crate::linalg;
use crate::signals::SignalBounds;

/// Default multiplicative margin on every strict bound.
pub const DEFAULT_MARGIN: f64 = 1.1;

/// Replaces a zero gamma bound so the switching term stays active.
pub const GAMMA_FLOOR: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GainError {
    #[error("graph is disconnected (lambda2 = {0:e}); no admissible gains")]
    Disconnected(f64),
    #[error("margin must exceed 1, got {0}")]
    BadMargin(f64),
    #[error("kappa must be positive, got {0}")]
    BadKappa(f64),
    #[error("signal bound {name} must be non-negative, got {value}")]
    BadBound { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthesized,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Algorithm 2 only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Present for synthesized sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub provenance: Provenance,
}

impl GainSet {
    /// User-supplied Algorithm-1 gains.
    pub fn communication(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            algorithm: Algorithm::Communication,
            alpha,
            beta,
            gamma,
            kappa: None,
            margin: None,
            provenance: Provenance::UserSupplied,
        }
    }

    /// User-supplied Algorithm-2 gains.
    pub fn sensing(kappa: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            algorithm: Algorithm::Sensing,
            alpha,
            beta,
            gamma,
            kappa: Some(kappa),
            margin: None,
            provenance: Provenance::UserSupplied,
        }
    }
}

fn check_margin(margin: f64) -> Result<(), GainError> {
    if margin > 1.0 && margin.is_finite() {
        Ok(())
    } else {
        Err(GainError::BadMargin(margin))
    }
}

fn check_connected(spec: &Spectrum) -> Result<(), GainError> {
    if spec.lambda2 > crate::graph::ZERO_EIGEN_TOL {
        Ok(())
    } else {
        Err(GainError::Disconnected(spec.lambda2))
    }
}

/// `max{1, 1/lambda2, (lambda2 + 1)/(2 lambda2)}`
pub fn alg1_alpha_bound(lambda2: f64) -> f64 {
    1f64.max(1.0 / lambda2)
        .max((lambda2 + 1.0) / (2.0 * lambda2))
}

/// `(n - 1) a_bar_d`
pub fn alg1_gamma_bound(n: usize, a_bar_d: f64) -> f64 {
    (n as f64 - 1.0) * a_bar_d
}

/// `(1 + alpha^4 lambdaN^2) / (4 lambda2 (alpha lambda2 - 1)(alpha - 1))`;
/// infinite when `alpha <= 1` or `alpha lambda2 <= 1`.
pub fn alg1_beta_bound(alpha: f64, lambda2: f64, lambda_n: f64) -> f64 {
    let denom = 4.0 * lambda2 * (alpha * lambda2 - 1.0) * (alpha - 1.0);
    if alpha <= 1.0 || alpha * lambda2 <= 1.0 {
        return f64::INFINITY;
    }
    (1.0 + alpha.powi(4) * lambda_n * lambda_n) / denom
}

/// `(alpha + 1)/(alpha - sqrt(n)) (kappa r_bar + kappa v_bar + a_bar)`;
/// infinite when `alpha <= sqrt(n)`.
pub fn alg2_gamma_bound(kappa: f64, alpha: f64, n: usize, bounds: &SignalBounds) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    if alpha <= sqrt_n {
        return f64::INFINITY;
    }
    (alpha + 1.0) / (alpha - sqrt_n) * (kappa * bounds.r_bar + kappa * bounds.v_bar + bounds.a_bar)
}

/// `1/(4(alpha-1)) [kappa^2/(kappa + (alpha-1) lambda2)
///  + ((kappa-1)^2 + 2 alpha^2 (kappa-1) lambdaN + alpha^4 lambdaN^2)/(alpha lambda2 + kappa - 1)]`;
/// infinite when `alpha <= 1`.
pub fn alg2_beta_bound(kappa: f64, alpha: f64, lambda2: f64, lambda_n: f64) -> f64 {
    if alpha <= 1.0 {
        return f64::INFINITY;
    }
    let first = kappa * kappa / (kappa + (alpha - 1.0) * lambda2);
    let second = ((kappa - 1.0).powi(2)
        + 2.0 * alpha * alpha * (kappa - 1.0) * lambda_n
        + alpha.powi(4) * lambda_n * lambda_n)
        / (alpha * lambda2 + kappa - 1.0);
    (first + second) / (4.0 * (alpha - 1.0))
}

fn floored(bound: f64) -> f64 {
    bound.max(GAMMA_FLOOR)
}

/// Algorithm-1 gains: each of alpha, gamma, beta is `margin` times its bound
/// (beta's bound evaluated at the chosen alpha).
pub fn synthesize_gains_alg1(
    spec: &Spectrum,
    n: usize,
    a_bar_d: f64,
    margin: f64,
) -> Result<GainSet, GainError> {
    check_margin(margin)?;
    check_connected(spec)?;
    if !(a_bar_d >= 0.0) {
        return Err(GainError::BadBound {
            name: "a_bar_d",
            value: a_bar_d,
        });
    }
    let alpha = margin * alg1_alpha_bound(spec.lambda2);
    let gamma = margin * floored(alg1_gamma_bound(n, a_bar_d));
    let beta = margin * alg1_beta_bound(alpha, spec.lambda2, spec.lambda_n);
    Ok(GainSet {
        algorithm: Algorithm::Communication,
        alpha,
        beta,
        gamma,
        kappa: None,
        margin: Some(margin),
        provenance: Provenance::Synthesized,
    })
}

/// Algorithm-2 gains: `kappa = margin`, `alpha = margin sqrt(n)`, then gamma
/// and beta at `margin` times their bounds.
pub fn synthesize_gains_alg2(
    spec: &Spectrum,
    n: usize,
    bounds: &SignalBounds,
    margin: f64,
) -> Result<GainSet, GainError> {
    check_margin(margin)?;
    check_connected(spec)?;
    for (name, value) in [
        ("r_bar", bounds.r_bar),
        ("v_bar", bounds.v_bar),
        ("a_bar", bounds.a_bar),
    ] {
        if !(value >= 0.0) {
            return Err(GainError::BadBound { name, value });
        }
    }
    let kappa = margin;
    let alpha = margin * (n as f64).sqrt();
    let gamma = margin * floored(alg2_gamma_bound(kappa, alpha, n, bounds));
    let beta = margin * alg2_beta_bound(kappa, alpha, spec.lambda2, spec.lambda_n);
    Ok(GainSet {
        algorithm: Algorithm::Sensing,
        alpha,
        beta,
        gamma,
        kappa: Some(kappa),
        margin: Some(margin),
        provenance: Provenance::Synthesized,
    })
}

/// One strict inequality `lhs > rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            pass: lhs > rhs,
        }
    }
}

/// Largest eigenvalue of the scalar-block derivative bound at one Laplacian
/// eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessSample {
    pub lambda: f64,
    pub max_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessCheck {
    /// `"Q"` for Algorithm 1, `"P"` for Algorithm 2.
    pub matrix: String,
    pub samples: Vec<DefinitenessSample>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub algorithm: Algorithm,
    pub provenance: Provenance,
    pub inequalities: Vec<InequalityCheck>,
    pub definiteness: DefinitenessCheck,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iss: Option<IssReport>,
    pub pass: bool,
}

impl GainReport {
    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.inequalities.iter().filter(|c| !c.pass)
    }
}

/// Scalar-block version of the Algorithm-1 bound matrix at Laplacian
/// eigenvalue `lambda`. The v-w coupling appears once in the derivative, so
/// it is split evenly across the two off-diagonal entries.
pub fn alg1_q_matrix(alpha: f64, beta: f64, lambda2: f64, lambda: f64) -> DMatrix<f64> {
    let q23 = 0.5 * (1.0 - alpha * alpha * lambda);
    DMatrix::from_row_slice(
        3,
        3,
        &[
            (1.0 - alpha) * lambda2,
            0.0,
            0.0,
            0.0,
            1.0 - alpha * lambda2,
            q23,
            0.0,
            q23,
            (1.0 - alpha) * beta * lambda2,
        ],
    )
}

/// Scalar-block version of the Algorithm-2 bound matrix at Laplacian
/// eigenvalue `lambda`.
pub fn alg2_p_matrix(kappa: f64, alpha: f64, beta: f64, lambda2: f64, lambda: f64) -> DMatrix<f64> {
    let p13 = -0.5 * kappa;
    let p23 = 0.5 * ((1.0 - kappa) - alpha * alpha * lambda);
    DMatrix::from_row_slice(
        3,
        3,
        &[
            -kappa + (1.0 - alpha) * lambda2,
            0.0,
            p13,
            0.0,
            1.0 - kappa - alpha * lambda2,
            p23,
            p13,
            p23,
            beta * (1.0 - alpha),
        ],
    )
}

fn definiteness(
    matrix: &str,
    spec: &Spectrum,
    build: impl Fn(f64) -> DMatrix<f64>,
) -> DefinitenessCheck {
    let samples: Vec<DefinitenessSample> = spec
        .nonzero()
        .iter()
        .map(|&lambda| {
            let max_eigenvalue = linalg::symmetric_eigenvalues(&build(lambda), 1e-14)
                .map(|ev| ev[ev.len() - 1])
                .unwrap_or(f64::NAN);
            DefinitenessSample {
                lambda,
                max_eigenvalue,
            }
        })
        .collect();
    let pass = !samples.is_empty() && samples.iter().all(|s| s.max_eigenvalue < 0.0);
    DefinitenessCheck {
        matrix: matrix.to_string(),
        samples,
        pass,
    }
}

/// Check every sufficient condition of the gains' algorithm. Failures are
/// report content, never errors.
pub fn verify_gains(
    gains: &GainSet,
    spec: &Spectrum,
    n: usize,
    bounds: &SignalBounds,
) -> GainReport {
    let (l2, ln) = (spec.lambda2, spec.lambda_n);
    let (alpha, beta, gamma) = (gains.alpha, gains.beta, gains.gamma);
    let mut inequalities = vec![InequalityCheck::new(
        "lambda2 > 0 (connected)",
        l2,
        crate::graph::ZERO_EIGEN_TOL,
    )];
    let (definiteness, iss) = match gains.algorithm {
        Algorithm::Communication => {
            inequalities.push(InequalityCheck::new("alpha > 1", alpha, 1.0));
            inequalities.push(InequalityCheck::new("alpha > 1/lambda2", alpha, 1.0 / l2));
            inequalities.push(InequalityCheck::new(
                "alpha > (lambda2+1)/(2 lambda2)",
                alpha,
                (l2 + 1.0) / (2.0 * l2),
            ));
            inequalities.push(InequalityCheck::new(
                "gamma > (n-1) a_bar_d",
                gamma,
                alg1_gamma_bound(n, bounds.a_bar_d),
            ));
            inequalities.push(InequalityCheck::new(
                "beta > (1+alpha^4 lambdaN^2)/(4 lambda2 (alpha lambda2-1)(alpha-1))",
                beta,
                alg1_beta_bound(alpha, l2, ln),
            ));
            let check = definiteness("Q", spec, |lambda| alg1_q_matrix(alpha, beta, l2, lambda));
            (check, None)
        }
        Algorithm::Sensing => {
            let kappa = gains.kappa.unwrap_or(f64::NAN);
            inequalities.push(InequalityCheck::new("kappa > 1", kappa, 1.0));
            inequalities.push(InequalityCheck::new(
                "alpha > sqrt(n)",
                alpha,
                (n as f64).sqrt(),
            ));
            inequalities.push(InequalityCheck::new(
                "gamma > (alpha+1)/(alpha-sqrt(n)) (kappa r_bar + kappa v_bar + a_bar)",
                gamma,
                alg2_gamma_bound(kappa, alpha, n, bounds),
            ));
            inequalities.push(InequalityCheck::new(
                "beta > Algorithm-2 beta bound",
                beta,
                alg2_beta_bound(kappa, alpha, l2, ln),
            ));
            let check = definiteness("P", spec, |lambda| {
                alg2_p_matrix(kappa, alpha, beta, l2, lambda)
            });
            (check, check_iss_subsystem(kappa).ok())
        }
    };
    let pass = inequalities.iter().all(|c| c.pass)
        && definiteness.pass
        && iss.as_ref().is_none_or(|r| r.hurwitz);
    GainReport {
        algorithm: gains.algorithm,
        provenance: gains.provenance,
        inequalities,
        definiteness,
        iss,
        pass,
    }
}

/// Eigenvalues of the per-axis companion matrix `[[0, 1], [-kappa, -kappa]]`
/// governing the sum errors `S1 = sum x - sum r`, `S2 = sum v - sum v^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssReport {
    pub kappa: f64,
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub hurwitz: bool,
}

pub fn check_iss_subsystem(kappa: f64) -> Result<IssReport, GainError> {
    if !(kappa > 0.0) {
        return Err(GainError::BadKappa(kappa));
    }
    let companion = Matrix2::new(0.0, 1.0, -kappa, -kappa);
    let eig = companion.complex_eigenvalues();
    let mut eigenvalues: Vec<(f64, f64)> =
        eig.iter().map(|c: &Complex<f64>| (c.re, c.im)).collect();
    eigenvalues.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let hurwitz = eigenvalues.iter().all(|&(re, _)| re < 0.0);
    Ok(IssReport {
        kappa,
        eigenvalues,
        hurwitz,
    })
}

impl fmt::Display for GainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Algorithm {} gains ({:?}): {}",
            self.algorithm,
            self.provenance,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        for c in &self.inequalities {
            writeln!(
                f,
                "  [{}] {:<72} lhs = {:>14.6e}  rhs = {:>14.6e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.lhs,
                c.rhs
            )?;
        }
        let worst = self
            .definiteness
            .samples
            .iter()
            .map(|s| s.max_eigenvalue)
            .fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            f,
            "  [{}] {} negative definite over lambda2..lambdaN   max eigenvalue = {:.6e}",
            if self.definiteness.pass {
                "pass"
            } else {
                "FAIL"
            },
            self.definiteness.matrix,
            worst
        )?;
        if let Some(iss) = &self.iss {
            let roots: Vec<String> = iss
                .eigenvalues
                .iter()
                .map(|(re, im)| format!("{re:.6}{im:+.6}i"))
                .collect();
            writeln!(
                f,
                "  [{}] sum-error subsystem Hurwitz (kappa = {}): {}",
                if iss.hurwitz { "pass" } else { "FAIL" },
                iss.kappa,
                roots.join(", ")
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, canonical_ten_node_graph, spectrum, EIGEN_TOL};
    use approx::assert_relative_eq;

    fn k2() -> Spectrum {
        spectrum(&build_graph(2, &[(1, 2)]).unwrap(), EIGEN_TOL).unwrap()
    }

    fn k4() -> Spectrum {
        let edges = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        spectrum(&build_graph(4, &edges).unwrap(), EIGEN_TOL).unwrap()
    }

    #[test]
    fn alg1_k2_example() {
        let g = synthesize_gains_alg1(&k2(), 2, 1.0, 1.1).unwrap();
        assert_relative_eq!(g.alpha, 1.1, max_relative = 1e-12);
        assert_relative_eq!(g.gamma, 1.1, max_relative = 1e-12);
        // 1.1 (1 + 1.1^4 * 4) / (4 * 2 * 1.2 * 0.1), by hand.
        let want = 1.1 * (1.0 + 1.4641 * 4.0) / (8.0 * 1.2 * 0.1);
        assert_relative_eq!(g.beta, want, max_relative = 1e-9);
        assert!((g.beta - 7.856).abs() < 1e-3);
    }

    #[test]
    fn alg1_zero_deviation_uses_floor() {
        let g = synthesize_gains_alg1(&k2(), 2, 0.0, 1.1).unwrap();
        assert_relative_eq!(g.gamma, 1e-3 * 1.1, max_relative = 1e-12);
        assert!(verify_gains(&g, &k2(), 2, &SignalBounds::exact(0.0, 0.0, 0.0, 0.0)).pass);
    }

    #[test]
    fn alg2_k4_example() {
        let bounds = SignalBounds::exact(0.0, 1.0, 1.0, 1.0);
        let g = synthesize_gains_alg2(&k4(), 4, &bounds, 1.1).unwrap();
        assert_relative_eq!(g.kappa.unwrap(), 1.1, max_relative = 1e-12);
        assert_relative_eq!(g.alpha, 2.2, max_relative = 1e-12);
        assert_relative_eq!(g.gamma, 56.32, max_relative = 1e-9);
        // beta by hand with kappa = 1.1, alpha = 2.2, lambda2 = lambdaN = 4.
        let first = 1.21 / (1.1 + 1.2 * 4.0);
        let second = (0.01 + 2.0 * 4.84 * 0.1 * 4.0 + 2.2f64.powi(4) * 16.0) / (8.8 + 0.1);
        assert_relative_eq!(
            g.beta,
            1.1 * (first + second) / (4.0 * 1.2),
            max_relative = 1e-9
        );
        assert!(verify_gains(&g, &k4(), 4, &bounds).pass);
    }

    #[test]
    fn alg2_zero_bounds_use_floor() {
        let bounds = SignalBounds::exact(0.0, 0.0, 0.0, 0.0);
        let g = synthesize_gains_alg2(&k4(), 4, &bounds, 1.1).unwrap();
        assert_relative_eq!(g.gamma, 1.1e-3, max_relative = 1e-12);
    }

    #[test]
    fn synthesis_refuses_disconnected_graph_and_bad_margin() {
        let s = spectrum(&build_graph(3, &[(1, 2)]).unwrap(), EIGEN_TOL).unwrap();
        assert!(matches!(
            synthesize_gains_alg1(&s, 3, 1.0, 1.1),
            Err(GainError::Disconnected(_))
        ));
        let b = SignalBounds::exact(0.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            synthesize_gains_alg2(&s, 3, &b, 1.1),
            Err(GainError::Disconnected(_))
        ));
        assert_eq!(
            synthesize_gains_alg1(&k2(), 2, 1.0, 1.0),
            Err(GainError::BadMargin(1.0))
        );
    }

    #[test]
    fn alpha_at_one_fails_strictly() {
        let mut g = synthesize_gains_alg1(&k2(), 2, 1.0, 1.1).unwrap();
        g.alpha = 1.0;
        let report = verify_gains(&g, &k2(), 2, &SignalBounds::exact(1.0, 0.0, 0.0, 0.0));
        let check = report
            .inequalities
            .iter()
            .find(|c| c.name == "alpha > 1")
            .unwrap();
        assert!(!check.pass);
        assert!(!report.pass);
    }

    #[test]
    fn paper_case2_gains_on_canonical_graph() {
        let spec = spectrum(&canonical_ten_node_graph(), EIGEN_TOL).unwrap();
        let g = GainSet::sensing(2.0, 10.0, 450.0, 50.0);
        let bounds = SignalBounds::exact(0.99, 1.0, 1.0, 1.0);
        let report = verify_gains(&g, &spec, 10, &bounds);
        let find = |name: &str| {
            report
                .inequalities
                .iter()
                .find(|c| c.name == name)
                .unwrap()
                .pass
        };
        assert!(find("kappa > 1"));
        assert!(find("alpha > sqrt(n)"));
        assert!(report.iss.as_ref().unwrap().hurwitz);
        let text = report.to_string();
        assert!(text.contains("gamma >") && text.contains("beta >"));
    }

    #[test]
    fn synthesized_alpha_gamma_kappa_grow_with_margin() {
        let spec = spectrum(&canonical_ten_node_graph(), EIGEN_TOL).unwrap();
        let bounds = SignalBounds::exact(2.0, 3.0, 1.5, 0.7);
        let mut prev1 = synthesize_gains_alg1(&spec, 10, 2.0, 1.01).unwrap();
        let mut prev2 = synthesize_gains_alg2(&spec, 10, &bounds, 1.01).unwrap();
        for k in 1..40 {
            let margin = 1.01 + 0.05 * k as f64;
            let g1 = synthesize_gains_alg1(&spec, 10, 2.0, margin).unwrap();
            let g2 = synthesize_gains_alg2(&spec, 10, &bounds, margin).unwrap();
            assert!(g1.alpha >= prev1.alpha && g1.gamma >= prev1.gamma);
            assert!(g2.alpha >= prev2.alpha && g2.kappa >= prev2.kappa);
            prev1 = g1;
            prev2 = g2;
        }
    }

    #[test]
    fn synthesized_beta_is_not_monotone_in_margin() {
        // beta's bound falls steeply as alpha moves away from 1/lambda2, so a
        // larger margin can give a smaller beta.
        let b11 = synthesize_gains_alg1(&k2(), 2, 1.0, 1.1).unwrap().beta;
        let b12 = synthesize_gains_alg1(&k2(), 2, 1.0, 1.2).unwrap().beta;
        assert!(b12 < b11);
    }

    #[test]
    fn alg1_beta_bound_decreases_in_lambda2() {
        let (alpha, lambda_n) = (3.0, 6.0);
        let grid: Vec<f64> = (0..200).map(|k| 0.34 + 0.02 * k as f64).collect();
        for pair in grid.windows(2) {
            assert!(alpha * pair[0] > 1.0);
            assert!(
                alg1_beta_bound(alpha, pair[1], lambda_n)
                    < alg1_beta_bound(alpha, pair[0], lambda_n)
            );
        }
    }

    #[test]
    fn iss_companion_is_hurwitz_for_positive_kappa() {
        for k in 1..200 {
            let kappa = 0.05 * k as f64;
            let report = check_iss_subsystem(kappa).unwrap();
            assert!(report.hurwitz, "kappa = {kappa}");
            assert_eq!(report.eigenvalues.len(), 2);
        }
        assert_eq!(check_iss_subsystem(0.0), Err(GainError::BadKappa(0.0)));
    }

    #[test]
    fn iss_kappa_two() {
        let r = check_iss_subsystem(2.0).unwrap();
        assert_relative_eq!(r.eigenvalues[0].0, -1.0, max_relative = 1e-12);
        assert_relative_eq!(r.eigenvalues[0].1, -1.0, max_relative = 1e-12);
        assert_relative_eq!(r.eigenvalues[1].1, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn report_round_trips_through_json() {
        let g = synthesize_gains_alg1(&k2(), 2, 1.0, 1.1).unwrap();
        let report = verify_gains(&g, &k2(), 2, &SignalBounds::exact(1.0, 0.0, 0.0, 0.0));
        let text = serde_json::to_string(&report).unwrap();
        let back: GainReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
