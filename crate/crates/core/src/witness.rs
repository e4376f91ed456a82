//! Exponent schemes, summing ratios and witness-based lower bounds for best
//! summing constants.
//!
//! For a fixed family of functionals `(φᵢ)` the supremum of every scheme's
//! ratio over the vectors is the same quantity
//!
//! ```text
//! G(φ) = ‖(N(φᵢ∘T))ᵢ‖_{p*} / ‖(φᵢ)‖_{w,p*}
//! ```
//!
//! where `N` is the norm of the scalar form `φᵢ∘T`; it is attained by the
//! profile `xᵢ⁽ʲ⁾ = cᵢ^{p*/qⱼ} uᵢ⁽ʲ⁾` with `cᵢ = N(φᵢ∘T)` and `uᵢ` a norming
//! tuple. The search therefore runs on `φ` alone, alternating that closed
//! form with a Cohen-norm maximization over `φ`, and each scheme reads its
//! witness off the best `φ`.

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domination::DominationCertificate;
use crate::error::{Error, Result};
use crate::operators::{check_args, eval_unchecked, form_norm, op_norm_argmax, OpNormArgmax, Operator};
use crate::rng::{derive, seeded};
use crate::scalar::Scalar;
use crate::seqnorms::{cohen_maximize_rough, weak_with, NormMethod, Separation, VecSequence, WeakMode};
use crate::spaces::{lq_of, random_unit, Exponent, SpaceSpec, Vector};

const GAMMA_TOL: f64 = 1e-12;
const SEARCH_ITERS: usize = 40;
const SEARCH_STOP: f64 = 1e-12;
const INNER_BUDGET: usize = 8;
const INNER_CUTS: usize = 40;
const INNER_GAP: f64 = 1e-3;

/// Default witness length cap.
pub const DEFAULT_M_MAX: usize = 6;

/// Outcome of a Γ membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaStatus {
    pub member: bool,
    /// Set for members with `p < q1`, equivalently `q0 > 1`.
    pub triviality_zone: bool,
}

/// `1/q0 = 1/q1 + 1/p*`, `q0 ∈ [1, ∞)`, `q1 ∈ (1, ∞)`, within `1e-12`.
pub fn gamma_check(p: Exponent, q0: Exponent, q1: Exponent) -> GammaStatus {
    let (Exponent::Finite(a), Exponent::Finite(b)) = (q0, q1) else {
        return GammaStatus { member: false, triviality_zone: false };
    };
    let p_ok = match p {
        Exponent::Finite(v) => v > 1.0,
        Exponent::Infinite => true,
    };
    let member = p_ok
        && a >= 1.0
        && b > 1.0
        && (q0.reciprocal() - q1.reciprocal() - p.conjugate().reciprocal()).abs() <= GAMMA_TOL;
    GammaStatus { member, triviality_zone: member && q1.reciprocal() < p.reciprocal() - GAMMA_TOL }
}

/// Exact Γ test for rational exponents (`p` finite).
pub fn gamma_check_exact(p: Ratio<i64>, q0: Ratio<i64>, q1: Ratio<i64>) -> GammaStatus {
    let one = Ratio::<i64>::one();
    if p <= one || q0 < one || q1 <= one {
        return GammaStatus { member: false, triviality_zone: false };
    }
    // 1/p* = 1 - 1/p
    let member = q0.recip() == q1.recip() + (one - p.recip());
    GammaStatus { member, triviality_zone: member && p < q1 }
}

/// Which summing inequality is being estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchemeKind {
    /// `(Σ|φᵢ(Txᵢ)|^{q0})^{1/q0} ≤ C ‖(xᵢ)‖_{q1} ‖(φᵢ)‖_{w,p*}`.
    Linear { q0: Exponent, q1: Exponent },
    /// `Σ|φᵢ(T(xᵢ…))| ≤ C (Σᵢ Πⱼ‖xᵢ⁽ʲ⁾‖^p)^{1/p} ‖(φᵢ)‖_{w,p*}`.
    MultiJoint,
    /// Right-hand side `Πⱼ ‖(xᵢ⁽ʲ⁾)‖_{np}`.
    MultiSeparate { n: usize },
    /// Left exponent `q0`, right-hand side `Πⱼ ‖(xᵢ⁽ʲ⁾)‖_{qⱼ}`.
    MultiGeneral { q0: Exponent, qs: Vec<Exponent> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentScheme {
    pub p: Exponent,
    pub pstar: Exponent,
    pub kind: SchemeKind,
}

fn summing_p(p: Exponent) -> Result<()> {
    match p {
        Exponent::Finite(v) if v <= 1.0 => Err(Error::InvalidInput(format!("summing exponent must exceed 1, got {v}"))),
        _ => Ok(()),
    }
}

impl ExponentScheme {
    pub fn linear(p: Exponent, q0: Exponent, q1: Exponent) -> Result<Self> {
        summing_p(p)?;
        if !gamma_check(p, q0, q1).member {
            let val = |e: Exponent| match e {
                Exponent::Finite(v) => v,
                Exponent::Infinite => f64::INFINITY,
            };
            return Err(Error::NotGammaPair { q0: val(q0), q1: val(q1), pstar: val(p.conjugate()) });
        }
        Ok(ExponentScheme { p, pstar: p.conjugate(), kind: SchemeKind::Linear { q0, q1 } })
    }

    /// The Cohen scheme `(1, p)`.
    pub fn cohen(p: Exponent) -> Result<Self> {
        Self::linear(p, Exponent::ONE, p)
    }

    pub fn joint(p: Exponent) -> Result<Self> {
        summing_p(p)?;
        Ok(ExponentScheme { p, pstar: p.conjugate(), kind: SchemeKind::MultiJoint })
    }

    pub fn separate(p: Exponent, n: usize) -> Result<Self> {
        summing_p(p)?;
        if n == 0 {
            return Err(Error::InvalidInput("separate scheme needs n ≥ 1".into()));
        }
        Ok(ExponentScheme { p, pstar: p.conjugate(), kind: SchemeKind::MultiSeparate { n } })
    }

    pub fn general(p: Exponent, q0: Exponent, qs: Vec<Exponent>) -> Result<Self> {
        summing_p(p)?;
        if qs.is_empty() {
            return Err(Error::InvalidInput("general scheme needs at least one slot exponent".into()));
        }
        let q0_ok = matches!(q0, Exponent::Finite(v) if v >= 1.0);
        let slots_ok = qs.iter().all(|q| !matches!(q, Exponent::Finite(v) if *v < 1.0));
        let gap = q0.reciprocal() - qs.iter().map(|q| q.reciprocal()).sum::<f64>() - p.conjugate().reciprocal();
        if !q0_ok || !slots_ok || gap.abs() > GAMMA_TOL {
            let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            return Err(Error::ExponentIdentity(format!(
                "1/{q0} != Σ 1/qⱼ + 1/{} for qⱼ = [{}]",
                p.conjugate(),
                list.join(", ")
            )));
        }
        Ok(ExponentScheme { p, pstar: p.conjugate(), kind: SchemeKind::MultiGeneral { q0, qs } })
    }

    /// Left-hand exponent.
    pub fn q0(&self) -> Exponent {
        match &self.kind {
            SchemeKind::Linear { q0, .. } | SchemeKind::MultiGeneral { q0, .. } => *q0,
            SchemeKind::MultiJoint | SchemeKind::MultiSeparate { .. } => Exponent::ONE,
        }
    }

    /// Per-slot right-hand exponents; `None` for the joint scheme.
    pub fn slot_exponents(&self) -> Option<Vec<Exponent>> {
        match &self.kind {
            SchemeKind::Linear { q1, .. } => Some(vec![*q1]),
            SchemeKind::MultiSeparate { n } => Some(vec![self.p.times(*n as f64); *n]),
            SchemeKind::MultiGeneral { qs, .. } => Some(qs.clone()),
            SchemeKind::MultiJoint => None,
        }
    }

    pub fn check_arity(&self, arity: usize) -> Result<()> {
        let want = match &self.kind {
            SchemeKind::Linear { .. } => Some(1),
            SchemeKind::MultiJoint => None,
            SchemeKind::MultiSeparate { n } => Some(*n),
            SchemeKind::MultiGeneral { qs, .. } => Some(qs.len()),
        };
        match want {
            Some(k) if k != arity => Err(Error::InvalidInput(format!(
                "scheme {} expects a {k}-linear operator, got {arity}-linear",
                self.label()
            ))),
            _ => Ok(()),
        }
    }

    /// Exponents `aⱼ` of the optimal profile `xᵢ⁽ʲ⁾ = cᵢ^{aⱼ} uᵢ⁽ʲ⁾`.
    fn profile_exponents(&self, arity: usize) -> Vec<f64> {
        let pstar = match self.pstar {
            Exponent::Finite(v) => v,
            Exponent::Infinite => unreachable!("p > 1"),
        };
        match self.slot_exponents() {
            Some(qs) => qs.iter().map(|q| pstar * q.reciprocal()).collect(),
            None => (0..arity).map(|j| if j == 0 { pstar * self.p.reciprocal() } else { 0.0 }).collect(),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SchemeKind::Linear { q0, q1 } => format!("linear(q0={q0},q1={q1};p={})", self.p),
            SchemeKind::MultiJoint => format!("joint(p={})", self.p),
            SchemeKind::MultiSeparate { n } => format!("separate(n={n};p={})", self.p),
            SchemeKind::MultiGeneral { q0, qs } => {
                let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
                format!("general(q0={q0},q=[{}];p={})", list.join(","), self.p)
            }
        }
    }
}

/// A finite witness family `((xᵢ⁽¹⁾, …, xᵢ⁽ⁿ⁾), φᵢ)`, `i = 1..m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummingWitness<S> {
    /// One sequence per slot, all of length `m`.
    pub xs: Vec<VecSequence<S>>,
    /// Functionals in the dual of the codomain.
    pub phis: VecSequence<S>,
}

impl<S: Scalar> SummingWitness<S> {
    pub fn new(xs: Vec<VecSequence<S>>, phis: VecSequence<S>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidInput("witness needs at least one slot".into()));
        }
        let m = phis.len();
        if m == 0 {
            return Err(Error::EmptySequence);
        }
        for s in &xs {
            if s.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: s.len() });
            }
        }
        Ok(SummingWitness { xs, phis })
    }

    pub fn linear(xs: VecSequence<S>, phis: VecSequence<S>) -> Result<Self> {
        Self::new(vec![xs], phis)
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn tuple(&self, i: usize) -> Vec<&Vector<S>> {
        self.xs.iter().map(|s| &s.items[i]).collect()
    }

    /// Split into single-term witnesses.
    pub fn pairs(&self) -> Vec<SummingWitness<S>> {
        (0..self.len())
            .map(|i| SummingWitness {
                xs: self
                    .xs
                    .iter()
                    .map(|s| VecSequence { space: s.space, items: vec![s.items[i].clone()] })
                    .collect(),
                phis: VecSequence { space: self.phis.space, items: vec![self.phis.items[i].clone()] },
            })
            .collect()
    }

    pub fn with_scaled_xs(&self, c: S) -> Self {
        SummingWitness { xs: self.xs.iter().map(|s| s.scaled(c)).collect(), phis: self.phis.clone() }
    }

    fn check_against<T: Operator<S> + ?Sized>(&self, op: &T) -> Result<()> {
        if self.xs.len() != op.arity() {
            return Err(Error::InvalidInput(format!(
                "witness has {} slots, operator has {}",
                self.xs.len(),
                op.arity()
            )));
        }
        for (s, d) in self.xs.iter().zip(op.domains()) {
            if s.space != *d {
                return Err(Error::InvalidInput(format!("witness slot space {} differs from domain {d}", s.space)));
            }
        }
        let fd = op.codomain().dual();
        if self.phis.space != fd {
            return Err(Error::InvalidInput(format!("functionals live in {}, expected {fd}", self.phis.space)));
        }
        for i in 0..self.len() {
            check_args(op, &self.tuple(i))?;
        }
        Ok(())
    }
}

/// `|φᵢ(T(xᵢ⁽¹⁾, …))|` for each `i`.
pub(crate) fn lhs_terms<S: Scalar, T: Operator<S> + ?Sized>(op: &T, w: &SummingWitness<S>) -> Vec<S> {
    (0..w.len()).map(|i| w.phis.items[i].dot(&eval_unchecked(op, &w.tuple(i))).abs()).collect()
}

/// Scheme right-hand side without the weak factor.
pub(crate) fn rhs_strong<S: Scalar>(scheme: &ExponentScheme, w: &SummingWitness<S>) -> S {
    let norms: Vec<Vec<S>> = w
        .xs
        .iter()
        .map(|s| s.items.iter().map(|x| s.space.norm_unchecked(x)).collect())
        .collect();
    match scheme.slot_exponents() {
        Some(qs) => norms.iter().zip(qs).map(|(n, q)| lq_of(n.iter().copied(), q)).fold(S::one(), |a, b| a * b),
        None => lq_of((0..w.len()).map(|i| norms.iter().map(|n| n[i]).fold(S::one(), |a, b| a * b)), scheme.p),
    }
}

/// A summing ratio and whether its weak-norm factor was exact or
/// oracle-resolved (otherwise it is advisory).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioValue<S> {
    pub value: S,
    pub certified: bool,
}

/// Left-hand side over right-hand side of the scheme's inequality.
pub fn ratio<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    w: &SummingWitness<S>,
    scheme: &ExponentScheme,
    weak: WeakMode<'_, S>,
) -> Result<RatioValue<S>> {
    scheme.check_arity(op.arity())?;
    w.check_against(op)?;
    let lhs = lq_of(lhs_terms(op, w), scheme.q0());
    let strong = rhs_strong(scheme, w);
    let wk = weak_with(&w.phis.space, &w.phis.items, scheme.pstar, weak);
    let den = strong * wk.value;
    if !(den > S::zero()) {
        return Err(Error::ZeroDenominator);
    }
    Ok(RatioValue { value: lhs / den, certified: wk.method != NormMethod::AscentHeuristic })
}

/// Witness bracket for a best summing constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate<S> {
    pub lower: S,
    pub upper: Option<S>,
    pub best_witness: SummingWitness<S>,
    pub certificate: Option<DominationCertificate<S>>,
    pub scheme: ExponentScheme,
    /// The lower bound used exact or oracle-resolved weak norms.
    pub lower_certified: bool,
    /// Best certified ratio found at each `m = 1..m_max`.
    pub per_m: Vec<S>,
    /// The upper bound came from a closed-form or oracle-resolved validation.
    pub upper_certified: bool,
    /// Set when the upper-bound loop met its gap tolerance.
    pub converged: bool,
}

/// Search knobs for [`lower_bound_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Random multistarts per `m`.
    pub budget: usize,
    pub seed: u64,
    pub m_max: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: 8, seed: 0, m_max: DEFAULT_M_MAX }
    }
}

/// Form norms `cᵢ = N(φᵢ∘T)` and norming tuples.
#[derive(Clone, Debug)]
pub(crate) struct FormProfile<S> {
    pub cs: Vec<S>,
    pub us: Vec<Vec<Vector<S>>>,
}

pub(crate) fn form_profile<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    phis: &[Vector<S>],
    warm: Option<&[Vec<Vector<S>>]>,
    seed: u64,
) -> FormProfile<S> {
    let mut cs = Vec::with_capacity(phis.len());
    let mut us = Vec::with_capacity(phis.len());
    for (i, phi) in phis.iter().enumerate() {
        let w = warm.and_then(|w| w.get(i)).map(|v| v.as_slice());
        let f = form_norm(op, phi, w, INNER_BUDGET, derive(seed, &[i as u64]));
        cs.push(f.value);
        us.push(f.xs);
    }
    FormProfile { cs, us }
}

/// Witness attaining `G(φ)` for `scheme`.
pub(crate) fn profile_witness<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    phis: &[Vector<S>],
    prof: &FormProfile<S>,
) -> SummingWitness<S> {
    let a = scheme.profile_exponents(op.arity());
    let all_zero = prof.cs.iter().all(|c| *c == S::zero());
    let xs = op
        .domains()
        .iter()
        .enumerate()
        .map(|(j, d)| VecSequence {
            space: *d,
            items: prof
                .us
                .iter()
                .zip(&prof.cs)
                .map(|(u, &c)| if all_zero { u[j].clone() } else { u[j].scaled(c.powf(S::of(a[j]))) })
                .collect(),
        })
        .collect();
    SummingWitness { xs, phis: VecSequence { space: op.codomain().dual(), items: phis.to_vec() } }
}

fn g_value<S: Scalar>(fd: &SpaceSpec, pstar: Exponent, phis: &[Vector<S>], cs: &[S], seed: u64) -> S {
    let weak = weak_with(fd, phis, pstar, WeakMode::NoGrid { budget: INNER_BUDGET, seed }).value;
    if weak > S::zero() {
        lq_of(cs.iter().copied(), pstar) / weak
    } else {
        S::zero()
    }
}

/// Alternating ascent on `G(φ)` from `phis`.
fn ascend<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    p: Exponent,
    phis: Vec<Vector<S>>,
    warm: Option<Vec<Vec<Vector<S>>>>,
    seed: u64,
) -> (S, Vec<Vector<S>>, FormProfile<S>) {
    let fd = op.codomain().dual();
    let pstar = p.conjugate();
    let cohen_exp = S::of(pstar.reciprocal().recip() * p.reciprocal());
    let mut phis = phis;
    let mut prof = form_profile(op, &phis, warm.as_deref(), seed);
    let mut g = g_value(&fd, pstar, &phis, &prof.cs, seed);
    for it in 0..SEARCH_ITERS {
        // Cohen-scheme witness for the current φ, then the best φ for it
        let ys: Vec<Vector<S>> = prof
            .us
            .iter()
            .zip(&prof.cs)
            .map(|(u, &c)| {
                let refs: Vec<&Vector<S>> = u.iter().collect();
                eval_unchecked(op, &refs).scaled(c.powf(cohen_exp))
            })
            .collect();
        if ys.iter().all(|y| y.is_zero()) {
            break;
        }
        let sep = Separation::Auto { budget: INNER_BUDGET, seed: derive(seed, &[it as u64]) };
        let Ok(sol) = cohen_maximize_rough(op.codomain(), &ys, p, sep, INNER_CUTS, INNER_GAP) else {
            break;
        };
        let next_prof = form_profile(op, &sol.phis, Some(&prof.us), seed);
        let next_g = g_value(&fd, pstar, &sol.phis, &next_prof.cs, seed);
        if !(next_g > g * (S::one() + S::of(SEARCH_STOP))) {
            break;
        }
        g = next_g;
        phis = sol.phis;
        prof = next_prof;
    }
    (g, phis, prof)
}

fn random_phis<S: Scalar, R: Rng>(fd: &SpaceSpec, m: usize, rng: &mut R) -> Vec<Vector<S>> {
    (0..m)
        .map(|_| {
            let s: f64 = rng.random_range(0.2..1.0);
            random_unit::<S, R>(fd, rng).scaled(S::of(s))
        })
        .collect()
}

/// Best `φ` families per `m`, shared by every scheme.
#[derive(Clone, Debug)]
pub(crate) struct PhiSearch<S> {
    /// `(φ, profile)` for `m = 1..m_max`.
    pub best: Vec<(Vec<Vector<S>>, FormProfile<S>)>,
}

pub(crate) fn search_phis<S: Scalar, T: Operator<S> + ?Sized>(op: &T, p: Exponent, cfg: &SearchConfig) -> PhiSearch<S> {
    let on = op_norm_argmax(op, cfg.budget.max(1), derive(cfg.seed, &[0x09]));
    let mut best: Vec<(Vec<Vector<S>>, FormProfile<S>)> = Vec::new();
    for m in 1..=cfg.m_max.max(1) {
        let next = best_for_m(op, p, m, best.last(), &on, cfg.budget, cfg.seed);
        best.push(next);
    }
    PhiSearch { best }
}

/// Best `φ` family of length `m`, started from `prev` padded with random
/// functionals (or from the operator-norm argmax when `prev` is absent)
/// plus `budget` random starts.
pub(crate) fn best_for_m<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    p: Exponent,
    m: usize,
    prev: Option<&(Vec<Vector<S>>, FormProfile<S>)>,
    on: &OpNormArgmax<S>,
    budget: usize,
    seed: u64,
) -> (Vec<Vector<S>>, FormProfile<S>) {
    let fd = op.codomain().dual();
    let mseed = derive(seed, &[m as u64]);
    let mut rng = seeded(mseed);
    let mut starts: Vec<(Vec<Vector<S>>, Option<Vec<Vec<Vector<S>>>>)> = Vec::new();
    match prev {
        Some((phis, prof)) if phis.len() < m => {
            let mut phis = phis.clone();
            let mut warm = prof.us.clone();
            while phis.len() < m {
                phis.push(random_unit(&fd, &mut rng).scaled(S::of(0.5)));
                warm.push(on.xs.clone());
            }
            starts.push((phis, Some(warm)));
        }
        _ => {
            let mut phis = vec![on.psi.clone()];
            let mut warm = vec![on.xs.clone()];
            while phis.len() < m {
                phis.push(random_unit(&fd, &mut rng).scaled(S::of(0.5)));
                warm.push(on.xs.clone());
            }
            starts.push((phis, Some(warm)));
        }
    }
    for _ in 0..budget {
        starts.push((random_phis(&fd, m, &mut rng), None));
    }
    let mut top: Option<(S, Vec<Vector<S>>, FormProfile<S>)> = None;
    for (k, (phis, warm)) in starts.into_iter().enumerate() {
        let (g, phis, prof) = ascend(op, p, phis, warm, derive(mseed, &[k as u64]));
        if top.as_ref().is_none_or(|t| g > t.0) {
            top = Some((g, phis, prof));
        }
    }
    let (_, phis, prof) = top.expect("at least one start");
    (phis, prof)
}

/// Ratio of the profile witness for `phis`; uncertified weak norms are
/// reported as such.
pub(crate) fn profile_ratio<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    phis: &[Vector<S>],
    prof: &FormProfile<S>,
    mode: WeakMode<'_, S>,
) -> Result<(RatioValue<S>, SummingWitness<S>)> {
    let w = profile_witness(op, scheme, phis, prof);
    match ratio(op, &w, scheme, mode) {
        Ok(r) => Ok((r, w)),
        Err(Error::ZeroDenominator) => Ok((RatioValue { value: S::zero(), certified: true }, w)),
        Err(e) => Err(e),
    }
}

/// Certified lower bound from optimized witnesses, `m = 1..m_max`.
pub fn lower_bound_with<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    cfg: &SearchConfig,
) -> Result<ConstantEstimate<S>> {
    scheme.check_arity(op.arity())?;
    let search = search_phis(op, scheme.p, cfg);
    estimate_from_search(op, scheme, &search, cfg)
}

pub(crate) fn estimate_from_search<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    search: &PhiSearch<S>,
    cfg: &SearchConfig,
) -> Result<ConstantEstimate<S>> {
    let mode = WeakMode::Auto { budget: cfg.budget.max(INNER_BUDGET), seed: cfg.seed, resolution: 0 };
    let mut certified: Option<(S, SummingWitness<S>)> = None;
    let mut advisory: Option<(S, SummingWitness<S>)> = None;
    let mut per_m = Vec::with_capacity(search.best.len());
    for (phis, prof) in &search.best {
        let (r, w) = profile_ratio(op, scheme, phis, prof, mode)?;
        let slot = if r.certified { &mut certified } else { &mut advisory };
        if slot.as_ref().is_none_or(|b| r.value > b.0) {
            *slot = Some((r.value, w));
        }
        let running = per_m.last().copied().unwrap_or(S::zero());
        per_m.push(if r.certified { running.max(r.value) } else { running });
    }
    // an advisory value is used only when nothing certified beats it
    let (lower, best_witness, lower_certified) = match (certified, advisory) {
        (Some(c), Some(a)) if a.0 > c.0 && c.0 == S::zero() => (a.0, a.1, false),
        (Some(c), _) => (c.0, c.1, true),
        (None, Some(a)) => (a.0, a.1, false),
        (None, None) => unreachable!("m_max ≥ 1"),
    };
    Ok(ConstantEstimate {
        lower,
        upper: None,
        best_witness,
        certificate: None,
        scheme: scheme.clone(),
        lower_certified,
        upper_certified: false,
        per_m,
        converged: false,
    })
}

/// Lower bound with `budget` multistarts per `m`.
pub fn lower_bound<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    budget: usize,
    seed: u64,
    m_max: usize,
) -> Result<ConstantEstimate<S>> {
    if m_max == 0 {
        return Err(Error::InvalidInput("m_max must be at least 1".into()));
    }
    lower_bound_with(op, scheme, &SearchConfig { budget, seed, m_max })
}

/// Parse a rational literal such as `4/3` or `2`.
pub fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?);
            if b.is_zero() {
                None
            } else {
                Some(Ratio::new(a, b))
            }
        }
        None => s.parse::<i64>().ok().map(Ratio::from_integer),
    }
}
