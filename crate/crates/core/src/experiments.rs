//! Scripted cross-checks: coincidence of best constants across exponent
//! pairs, equivalence of multilinear schemes, a growth probe for pairs with
//! `q1 > p`, and a sampled three-exponent Hölder check.
//!
//! Reports are plain data and deterministic functions of their inputs; the
//! caller adds operator digests and timestamps.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::domination::{refine, refine_from, RefineConfig};
use crate::error::{Error, Result};
use crate::operators::{op_norm_argmax, LinearOp, MultilinearOp, Operator};
use crate::rng::{derive, seeded};
use crate::scalar::Scalar;
use crate::seqnorms::WeakMode;
use crate::spaces::{lq_of, Exponent};
use crate::witness::{
    best_for_m, estimate_from_search, gamma_check, profile_ratio, search_phis, ConstantEstimate, ExponentScheme,
};

/// Default relative tolerance for cross-scheme comparisons.
pub const CROSS_TOL: f64 = 0.05;
/// Absolute slack of the sampled Hölder check.
pub const HOLDER_SLACK: f64 = 1e-9;
/// Longest sampled sequence in the Hölder check.
pub const HOLDER_MAX_LEN: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Bracket for one scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub scheme: String,
    pub lower: f64,
    pub upper: Option<f64>,
    pub lower_certified: bool,
    pub upper_certified: bool,
    pub converged: bool,
    pub per_m: Vec<f64>,
}

impl Bracket {
    pub fn from_estimate<S: Scalar>(est: &ConstantEstimate<S>) -> Self {
        Bracket {
            scheme: est.scheme.label(),
            lower: est.lower.to_f64_lossy(),
            upper: est.upper.map(|u| u.to_f64_lossy()),
            lower_certified: est.lower_certified,
            upper_certified: est.upper_certified,
            converged: est.converged,
            per_m: est.per_m.iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    /// `upper / lower − 1`, or `0` for `[0, 0]`.
    pub fn relative_width(&self) -> Option<f64> {
        let u = self.upper?;
        if u == 0.0 && self.lower == 0.0 {
            return Some(0.0);
        }
        Some(if self.lower > 0.0 { u / self.lower - 1.0 } else { f64::MAX })
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.lower <= v * (1.0 + tol) + 1e-12 && self.upper.is_some_and(|u| v <= u * (1.0 + tol) + 1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub m: usize,
    /// Best ratio found with exactly `m` terms.
    pub ratio: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    /// Filled in by the caller (e.g. a content digest of the operator file).
    pub operator: Option<String>,
    pub schemes: Vec<String>,
    pub seed: u64,
    pub budget: usize,
    pub m_max: usize,
    pub atoms: usize,
    pub grid: usize,
    pub tol: f64,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub inputs: ReportInputs,
    pub brackets: Vec<Bracket>,
    pub verdict: Verdict,
    pub trend: Vec<TrendPoint>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Knobs shared by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub refine: RefineConfig,
    pub tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { refine: RefineConfig::default(), tol: CROSS_TOL }
    }
}

impl ExperimentConfig {
    fn inputs(&self, schemes: Vec<String>) -> ReportInputs {
        let r = &self.refine;
        ReportInputs {
            operator: None,
            schemes,
            seed: r.search.seed,
            budget: r.search.budget,
            m_max: r.search.m_max,
            atoms: r.atoms,
            grid: r.grid,
            tol: self.tol,
            params: BTreeMap::new(),
        }
    }
}

/// Pairwise check `lower_A ≤ upper_B (1 + tol)`. A conflict counts as
/// inconsistent only when both sides are certified.
pub fn cross_verdict(brackets: &[Bracket], tol: f64) -> Verdict {
    let mut verdict = Verdict::Consistent;
    for a in brackets {
        for b in brackets {
            let Some(ub) = b.upper else {
                verdict = Verdict::Inconclusive;
                continue;
            };
            if a.lower > ub * (1.0 + tol) + 1e-12 {
                if a.lower_certified && b.upper_certified {
                    return Verdict::Inconsistent;
                }
                verdict = Verdict::Inconclusive;
            }
        }
    }
    verdict
}

/// Γ pair `(q0, q1)` with the given `q1`: `1/q0 = 1/q1 + 1/p*`.
pub fn gamma_pair(p: Exponent, q1: Exponent) -> Result<(Exponent, Exponent)> {
    let q0 = Exponent::from_reciprocal(q1.reciprocal() + p.conjugate().reciprocal())?;
    Ok((q0, q1))
}

/// `(1, p)`, `(·, 2p)` and `(·, 4p/3)`; at `p = 2` these are
/// `(1,2)`, `(4/3,4)`, `(8/7,8/3)`.
pub fn default_pairs(p: Exponent) -> Result<Vec<(Exponent, Exponent)>> {
    let mut out = vec![(Exponent::ONE, p)];
    if !p.is_infinite() {
        out.push(gamma_pair(p, p.times(2.0))?);
        out.push(gamma_pair(p, p.times(4.0 / 3.0))?);
    }
    Ok(out)
}

fn run_schemes<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    schemes: &[ExponentScheme],
    cfg: &ExperimentConfig,
) -> Result<Vec<Bracket>> {
    schemes.iter().map(|s| refine(op, s, &cfg.refine).map(|e| Bracket::from_estimate(&e))).collect()
}

fn add_width_metrics(metrics: &mut BTreeMap<String, f64>, brackets: &[Bracket]) {
    let widest = brackets.iter().filter_map(Bracket::relative_width).fold(0.0, f64::max);
    metrics.insert("max_relative_width".into(), widest);
    let lo = brackets.iter().map(|b| b.lower).fold(0.0, f64::max);
    let up = brackets.iter().filter_map(|b| b.upper).fold(f64::INFINITY, f64::min);
    if up.is_finite() {
        metrics.insert("max_lower".into(), lo);
        metrics.insert("min_upper".into(), up);
    }
}

/// Brackets of the best constant for each Γ pair at exponent `p`.
pub fn coincidence<S: Scalar>(
    op: &LinearOp<S>,
    p: Exponent,
    pairs: &[(Exponent, Exponent)],
    cfg: &ExperimentConfig,
) -> Result<Report> {
    let mut notes = Vec::new();
    let mut schemes = Vec::new();
    for &(q0, q1) in pairs {
        schemes.push(ExponentScheme::linear(p, q0, q1)?);
    }
    if !pairs.iter().any(|(q0, q1)| *q0 == Exponent::ONE && *q1 == p) {
        schemes.insert(0, ExponentScheme::cohen(p)?);
        notes.push("added the (1, p) pair".into());
    }
    let brackets = run_schemes(op, &schemes, cfg)?;
    let verdict = cross_verdict(&brackets, cfg.tol);
    let mut metrics = BTreeMap::new();
    add_width_metrics(&mut metrics, &brackets);
    let mut inputs = cfg.inputs(schemes.iter().map(|s| s.label()).collect());
    inputs.params.insert("p".into(), p.to_string());
    Ok(Report { experiment: "coincidence".into(), inputs, brackets, verdict, trend: vec![], metrics, notes })
}

/// Brackets for several multilinear schemes sharing `p`.
pub fn multi_equivalence<S: Scalar>(
    op: &MultilinearOp<S>,
    p: Exponent,
    schemes: &[ExponentScheme],
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if schemes.is_empty() {
        return Err(Error::InvalidInput("no schemes given".into()));
    }
    for s in schemes {
        if s.p != p {
            return Err(Error::ExponentIdentity(format!("scheme {} does not use p = {p}", s.label())));
        }
        s.check_arity(op.arity())?;
    }
    let brackets = run_schemes(op, schemes, cfg)?;
    let verdict = cross_verdict(&brackets, cfg.tol);
    let mut metrics = BTreeMap::new();
    add_width_metrics(&mut metrics, &brackets);
    let mut inputs = cfg.inputs(schemes.iter().map(|s| s.label()).collect());
    inputs.params.insert("p".into(), p.to_string());
    Ok(Report { experiment: "multi-equivalence".into(), inputs, brackets, verdict, trend: vec![], metrics, notes: vec![] })
}

/// `1, 2, 4, …` up to `max`.
pub fn doubling_schedule(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |m| m.checked_mul(2)).take_while(|m| *m <= max.max(1)).collect()
}

/// Best ratio for each `m` of the schedule under `linear(q0, q1)` with
/// `q1 > p`, alongside the refined bracket. The verdict is inconclusive
/// unless a certified ratio exceeds a certified upper bound.
pub fn triviality_probe<S: Scalar>(
    op: &LinearOp<S>,
    p: Exponent,
    q0: Exponent,
    q1: Exponent,
    schedule: &[usize],
    cfg: &ExperimentConfig,
) -> Result<Report> {
    let scheme = ExponentScheme::linear(p, q0, q1)?;
    if !gamma_check(p, q0, q1).triviality_zone {
        return Err(Error::InvalidInput(format!("({q0}, {q1}) has q1 ≤ p = {p}; the probe needs q1 > p")));
    }
    if op.matrix.iter().all(|v| *v == S::zero()) {
        return Err(Error::InvalidInput("the probe needs a nonzero operator".into()));
    }
    let mut ms: Vec<usize> = schedule.iter().copied().filter(|m| *m > 0).collect();
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() {
        return Err(Error::InvalidInput("empty m schedule".into()));
    }

    let search_cfg = cfg.refine.search;
    let on = op_norm_argmax(op, search_cfg.budget.max(1), derive(search_cfg.seed, &[0x09]));
    let mode = WeakMode::Auto { budget: search_cfg.budget.max(8), seed: search_cfg.seed, resolution: 0 };
    let mut trend = Vec::with_capacity(ms.len());
    let mut prev = None;
    for &m in &ms {
        let found = best_for_m(op, p, m, prev.as_ref(), &on, search_cfg.budget, search_cfg.seed);
        let (r, _) = profile_ratio(op, &scheme, &found.0, &found.1, mode)?;
        trend.push(TrendPoint { m, ratio: r.value.to_f64_lossy(), certified: r.certified });
        prev = Some(found);
    }

    let search = search_phis(op, p, &search_cfg);
    let mut est = estimate_from_search(op, &scheme, &search, &search_cfg)?;
    refine_from(op, &scheme, &cfg.refine, &search, &mut est)?;
    let bracket = Bracket::from_estimate(&est);

    let peak = trend.iter().filter(|t| t.certified).map(|t| t.ratio).fold(0.0, f64::max);
    let first = trend[0].ratio;
    let last = trend[trend.len() - 1].ratio;
    let mut metrics = BTreeMap::new();
    metrics.insert("max_trend_ratio".into(), peak);
    metrics.insert("growth_last_over_first".into(), if first > 0.0 { last / first } else { 0.0 });
    let mut notes = Vec::new();
    let mut verdict = Verdict::Inconclusive;
    if let Some(u) = bracket.upper {
        metrics.insert("upper".into(), u);
        let bounded = peak <= u * (1.0 + cfg.tol) + 1e-12;
        metrics.insert("bounded".into(), if bounded { 1.0 } else { 0.0 });
        if bounded {
            notes.push("trend stays below the validated upper bound: evidence for a nontrivial class".into());
        } else if bracket.upper_certified {
            verdict = Verdict::Inconsistent;
            notes.push("a certified ratio exceeds the certified upper bound".into());
        } else {
            notes.push("trend exceeds an uncertified upper bound".into());
        }
    }
    let mut inputs = cfg.inputs(vec![scheme.label()]);
    inputs.params.insert("p".into(), p.to_string());
    inputs.params.insert("schedule".into(), ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","));
    Ok(Report { experiment: "triviality-probe".into(), inputs, brackets: vec![bracket], verdict, trend, metrics, notes })
}

/// `‖αβ‖_{q0} / (‖α‖_{p*} ‖β‖_{q1})`.
pub fn holder_ratio(alpha: &[f64], beta: &[f64], pstar: Exponent, q0: Exponent, q1: Exponent) -> (f64, f64, f64) {
    let lhs = lq_of(alpha.iter().zip(beta).map(|(a, b)| (a * b).abs()), q0);
    let rhs = lq_of(alpha.iter().map(|a| a.abs()), pstar) * lq_of(beta.iter().map(|b| b.abs()), q1);
    (lhs, rhs, if rhs > 0.0 { lhs / rhs } else { 0.0 })
}

fn sample_pair<R: Rng>(trial: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    match trial {
        0 => {
            let mut a = vec![0.0; 8];
            a[0] = 1.0;
            (a.clone(), a)
        }
        1 => {
            let a = (1..=HOLDER_MAX_LEN).map(|i| (i as f64).powf(-0.6)).collect();
            let b = (1..=HOLDER_MAX_LEN).map(|i| (i as f64).powf(-0.3)).collect();
            (a, b)
        }
        _ => {
            let len = if rng.random_bool(0.2) { rng.random_range(1..=HOLDER_MAX_LEN) } else { rng.random_range(1..=64) };
            let style = rng.random_range(0..4);
            let draw = |rng: &mut R, i: usize| -> f64 {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let mag: f64 = match style {
                    0 => rng.random_range(0.0..1.0),
                    1 => Exp1.sample(rng),
                    2 => ((i + 1) as f64).powf(-rng.random_range(0.1..1.5)),
                    _ => {
                        if rng.random_bool(0.1) {
                            rng.random_range(0.5..2.0)
                        } else {
                            0.0
                        }
                    }
                };
                sign * mag
            };
            let a: Vec<f64> = (0..len).map(|i| draw(rng, i)).collect();
            let b: Vec<f64> = (0..len).map(|i| draw(rng, i)).collect();
            (a, b)
        }
    }
}

/// Sampled check of `‖αβ‖_{q0} ≤ ‖α‖_{p*}‖β‖_{q1}` under `1/q0 = 1/q1 + 1/p*`.
pub fn holder_factor_check(p: Exponent, q0: Exponent, q1: Exponent, trials: usize, seed: u64) -> Result<Report> {
    let pstar = p.conjugate();
    if (q0.reciprocal() - q1.reciprocal() - pstar.reciprocal()).abs() > 1e-12 {
        return Err(Error::ExponentIdentity(format!("1/{q0} ≠ 1/{q1} + 1/{pstar}")));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let mut rng = seeded(derive(seed, &[0x401d]));
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0usize;
    let mut worst_slack = f64::INFINITY;
    let mut anchors = Vec::new();
    for t in 0..trials {
        let (a, b) = sample_pair(t, &mut rng);
        let (lhs, rhs, r) = holder_ratio(&a, &b, pstar, q0, q1);
        if lhs > rhs + HOLDER_SLACK {
            violations += 1;
        }
        worst_slack = worst_slack.min(rhs - lhs);
        max_ratio = max_ratio.max(r);
        if t < 2 {
            anchors.push(r);
        }
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("max_ratio".into(), max_ratio);
    metrics.insert("min_slack".into(), worst_slack);
    metrics.insert("trials".into(), trials as f64);
    metrics.insert("violations".into(), violations as f64);
    for (i, r) in anchors.iter().enumerate() {
        metrics.insert(format!("anchor_{i}_ratio"), *r);
    }
    let verdict = if violations == 0 { Verdict::Consistent } else { Verdict::Inconsistent };
    let notes = vec![
        "no sampled pair realizes a product outside ℓ_q0 with factors in ℓ_p* and ℓ_q1".into(),
    ];
    let inputs = ReportInputs {
        operator: None,
        schemes: vec![format!("holder({p};{q0},{q1})")],
        seed,
        budget: 0,
        m_max: 0,
        atoms: 0,
        grid: 0,
        tol: HOLDER_SLACK,
        params: BTreeMap::from([("trials".to_string(), trials.to_string())]),
    };
    Ok(Report { experiment: "holder-check".into(), inputs, brackets: vec![], verdict, trend: vec![], metrics, notes })
}
