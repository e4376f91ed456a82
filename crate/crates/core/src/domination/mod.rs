//! Finite atomic Pietsch domination: certificate fitting by linear
//! programming, validation of a fixed measure, a Kelley refinement loop and
//! the abstract `R₁,…,R_t`-`S` engine.
//!
//! A certificate is a probability vector `μ` on atoms `ψₖ` of the codomain
//! ball. It certifies `|φ(T(x⁽¹⁾, …))| ≤ C Πⱼ‖x⁽ʲ⁾‖ (Σₖ μₖ|ψₖ(φ)|^{p*})^{1/p*}`,
//! and by Hölder's inequality that bound transfers to every summing
//! inequality in every scheme with the same `C`.

mod engine;

pub use engine::{abstract_bounds, canonical, canonical_points, AbstractBounds, AbstractPoint, AbstractProblem, RMap};
pub use crate::lp::{lp_min, LpOutcome, LpSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat};
use crate::operators::{eval_unchecked, form_norm, op_norm_argmax, LinearOp, Operator};
use crate::rng::{derive, seeded};
use crate::scalar::Scalar;
use crate::seqnorms::WeakMode;
use crate::spaces::{random_unit, sphere_grid, BallKind, BallSample, Exponent, SpaceSpec, Vector};
use crate::witness::{
    estimate_from_search, form_profile, profile_witness, ratio, search_phis, ConstantEstimate, ExponentScheme,
    SearchConfig, SummingWitness,
};

const GOLDEN_ITERS: usize = 80;
const POLISH_SWEEPS: usize = 12;
const LOCAL_MAXIMA: usize = 4;

/// Finite atomic domination measure with its constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate<S> {
    /// Points of the codomain unit ball (standing in for the bidual ball).
    pub atoms: BallSample<S>,
    pub weights: Vec<S>,
    /// `(Σν)^{1/p*}` from the fitting LP.
    pub constant: S,
    pub scheme: ExponentScheme,
}

/// `x^q` through the shared exponent helper.
pub(crate) fn powq<S: Scalar>(v: S, q: Exponent) -> S {
    q.pow(v)
}

/// Solution of the domination LP in multiplier form.
#[derive(Clone, Debug)]
pub(crate) struct DomLp<S> {
    /// Per-point dual weights.
    pub y: Vec<S>,
    pub constant: S,
    pub weights: Vec<S>,
}

/// Solve `min Σνₖ` subject to `Σₖ b[w][k] νₖ ≥ a[w]` through its dual
/// `max Σ a_w y_w`, `Σ_w b[w][k] y_w ≤ 1`, whose row multipliers are `ν`.
pub(crate) fn domination_lp<S: Scalar>(a: &[S], b: &[Vec<S>], q: Exponent) -> Result<DomLp<S>> {
    let atoms = b.first().map_or(0, |r| r.len());
    if atoms == 0 {
        return Err(Error::InvalidInput("domination needs at least one atom".into()));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("domination needs at least one witness".into()));
    }
    for (w, row) in b.iter().enumerate() {
        if a[w] > S::zero() && row.iter().all(|v| *v == S::zero()) {
            return Err(Error::Infeasible { witness: w });
        }
    }
    let c: Vec<S> = a.iter().map(|v| -*v).collect();
    let rows: Vec<Vec<S>> = (0..atoms).map(|k| b.iter().map(|r| r[k]).collect()).collect();
    let sol = match lp_min(&c, &rows, &vec![S::one(); atoms])? {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Unbounded { column } => return Err(Error::Infeasible { witness: column }),
        LpOutcome::Infeasible => return Err(Error::NonConvergence("domination LP dual infeasible".into())),
    };
    let nu = sol.duals;
    let total: S = nu.iter().copied().sum();
    let (constant, weights) = if total > S::zero() {
        (q.root(total), nu.iter().map(|v| *v / total).collect())
    } else {
        (S::zero(), vec![S::one() / S::of_usize(atoms); atoms])
    };
    Ok(DomLp { y: sol.x, constant, weights })
}

/// One term of a witness: `(x⁽¹⁾, …, x⁽ⁿ⁾, φ)`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Pair<S> {
    pub xs: Vec<Vector<S>>,
    pub phi: Vector<S>,
}

fn pairs_of<S: Scalar>(witnesses: &[SummingWitness<S>]) -> Vec<Pair<S>> {
    let mut out = Vec::new();
    for w in witnesses {
        for i in 0..w.len() {
            out.push(Pair { xs: w.tuple(i).into_iter().cloned().collect(), phi: w.phis.items[i].clone() });
        }
    }
    out
}

/// LP coefficients `a = S^{q}` and `b = (ΠR)^{q} R_t^{q}` for the
/// canonical choice `S = |φ(T(x…))|`, `R = ‖x⁽ʲ⁾‖`, `R_t = |ψ(φ)|`.
pub(crate) fn canonical_coefficients<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    pairs: &[Pair<S>],
    atoms: &[Vector<S>],
    q: Exponent,
) -> (Vec<S>, Vec<Vec<S>>) {
    let doms = op.domains();
    let mut a = Vec::with_capacity(pairs.len());
    let mut b = Vec::with_capacity(pairs.len());
    for pr in pairs {
        let refs: Vec<&Vector<S>> = pr.xs.iter().collect();
        a.push(powq(pr.phi.dot(&eval_unchecked(op, &refs)).abs(), q));
        let r = pr.xs.iter().zip(doms).fold(S::one(), |acc, (x, d)| acc * d.norm_unchecked(x));
        let rq = powq(r, q);
        b.push(atoms.iter().map(|psi| rq * powq(psi.dot(&pr.phi).abs(), q)).collect());
    }
    (a, b)
}

/// Fit a measure on `atoms` dominating every term of every witness.
pub fn fit_certificate<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    atoms: &BallSample<S>,
    witnesses: &[SummingWitness<S>],
) -> Result<DominationCertificate<S>> {
    scheme.check_arity(op.arity())?;
    if atoms.space != *op.codomain() {
        return Err(Error::InvalidInput(format!("atoms live in {}, codomain is {}", atoms.space, op.codomain())));
    }
    let pairs = pairs_of(witnesses);
    fit_pairs(op, scheme, atoms, &pairs).map(|(c, _)| c)
}

fn fit_pairs<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    atoms: &BallSample<S>,
    pairs: &[Pair<S>],
) -> Result<(DominationCertificate<S>, DomLp<S>)> {
    let (a, b) = canonical_coefficients(op, pairs, &atoms.points, scheme.pstar);
    let lp = domination_lp(&a, &b, scheme.pstar)?;
    let cert = DominationCertificate {
        atoms: atoms.clone(),
        weights: lp.weights.clone(),
        constant: lp.constant,
        scheme: scheme.clone(),
    };
    Ok((cert, lp))
}

/// Result of validating a fixed measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation<S> {
    /// `sup_φ N(φ∘T) / (Σμₖ|ψₖ(φ)|^{p*})^{1/p*}`.
    pub value: S,
    pub argmax: Vector<S>,
    /// Closed form, or grid plus polish with exact form norms in dimension ≤ 3.
    pub certified: bool,
    /// Further local maxima, best first.
    pub maxima: Vec<Vector<S>>,
}

struct Objective<'a, S, T: ?Sized> {
    op: &'a T,
    atoms: &'a [Vector<S>],
    weights: &'a [S],
    q: Exponent,
    budget: usize,
    seed: u64,
    scale: S,
}

impl<S: Scalar, T: Operator<S> + ?Sized> Objective<'_, S, T> {
    fn denominator(&self, phi: &Vector<S>) -> S {
        let s: S = self
            .atoms
            .iter()
            .zip(self.weights)
            .filter(|(_, w)| **w > S::zero())
            .map(|(psi, &w)| w * powq(psi.dot(phi).abs(), self.q))
            .sum();
        self.q.root(s)
    }

    /// `Ok(None)` when both sides vanish.
    fn eval(&self, phi: &Vector<S>) -> (S, S, bool) {
        let f = form_norm(self.op, phi, None, self.budget, self.seed);
        let den = self.denominator(phi);
        let num = f.value;
        let tiny = S::tol() * self.scale;
        if den <= tiny * S::of(1e-3) {
            if num <= tiny {
                return (S::zero(), den, f.exact);
            }
            return (S::infinity(), den, f.exact);
        }
        (num / den, den, f.exact)
    }

    fn value(&self, phi: &Vector<S>) -> S {
        let (v, _, _) = self.eval(phi);
        if v.is_finite() {
            v
        } else {
            S::max_value()
        }
    }
}

fn golden<S: Scalar>(f: impl Fn(S) -> S, lo: S, hi: S) -> (S, S) {
    let g = S::of((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn angle2<S: Scalar>(t: S) -> Vector<S> {
    Vector(vec![t.cos(), t.sin()])
}

fn angle3<S: Scalar>(theta: S, phi: S) -> Vector<S> {
    Vector(vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
}

fn to_angles3<S: Scalar>(v: &Vector<S>) -> (S, S) {
    let r = v.euclidean();
    let theta = (v.0[2] / r).max(-S::one()).min(S::one()).acos();
    (theta, v.0[1].atan2(v.0[0]))
}

/// Exact supremum when `F` is Euclidean, `p* = 2`, the map is linear on a
/// Euclidean domain and the weighted atom Gram matrix is well conditioned.
fn hilbert_validation<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    atoms: &[Vector<S>],
    weights: &[S],
    q: Exponent,
) -> Option<(S, Vector<S>)> {
    let cod = op.codomain();
    if op.arity() != 1 || !q.is(2.0) || !cod.exponent.is(2.0) || !op.domains()[0].exponent.is(2.0) {
        return None;
    }
    let d = cod.dim;
    let n = op.domains()[0].dim;
    let t = op.tensor();
    let mut bmat = Mat::zeros(d, d);
    for (psi, &w) in atoms.iter().zip(weights) {
        for i in 0..d {
            for j in 0..d {
                bmat.set(i, j, bmat.at(i, j) + w * psi.0[i] * psi.0[j]);
            }
        }
    }
    let (vals, vecs) = sym_eigen(&bmat);
    let top = vals[0];
    if !(top > S::zero()) || vals[d - 1] <= S::of(1e-9) * top {
        return None;
    }
    // W = B^{-1/2}
    let mut wmat = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let v: S = (0..d).map(|k| vecs.at(i, k) * vecs.at(j, k) / vals[k].sqrt()).sum();
            wmat.set(i, j, v);
        }
    }
    let mut amat = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let v: S = (0..n).map(|k| t[i * n + k] * t[j * n + k]).sum();
            amat.set(i, j, v);
        }
    }
    let m = wmat.mul(&amat).mul(&wmat);
    let (mv, mvecs) = sym_eigen(&m);
    let v = Vector((0..d).map(|i| mvecs.at(i, 0)).collect::<Vec<S>>());
    let phi = Vector((0..d).map(|i| (0..d).map(|k| wmat.at(i, k) * v.0[k]).sum()).collect());
    Some((mv[0].max(S::zero()).sqrt(), phi))
}

/// Supremum of the domination ratio for fixed atoms and weights.
pub(crate) fn validate_measure<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    atoms: &[Vector<S>],
    weights: &[S],
    q: Exponent,
    grid: usize,
    budget: usize,
    seed: u64,
) -> Result<Validation<S>> {
    let fd = op.codomain().dual();
    let d = fd.dim;
    let scale = op.tensor().iter().fold(S::zero(), |a, v| a.max(v.abs()));
    let obj = Objective { op, atoms, weights, q, budget: budget.max(1), seed, scale: scale.max(S::one()) };
    if scale == S::zero() {
        return Ok(Validation { value: S::zero(), argmax: Vector::basis(d, 0), certified: true, maxima: vec![] });
    }
    if let Some((value, argmax)) = hilbert_validation(op, atoms, weights, q) {
        return Ok(Validation { value, argmax, certified: true, maxima: vec![] });
    }

    let exact = std::cell::Cell::new(true);
    let check = |idx: usize, phi: &Vector<S>| -> Result<S> {
        let (v, _, ex) = obj.eval(phi);
        exact.set(exact.get() && ex);
        if v.is_infinite() {
            return Err(Error::DegenerateMeasure { witness: idx });
        }
        Ok(v)
    };

    let polished: Vec<(S, Vector<S>)> = match d {
        1 => {
            let phi = Vector(vec![S::one()]);
            vec![(check(0, &phi)?, phi)]
        }
        2 => {
            let n = grid.max(8);
            let step = S::of(std::f64::consts::PI) / S::of_usize(n);
            let vals: Vec<S> = (0..n).map(|i| check(i, &angle2(step * S::of_usize(i)))).collect::<Result<_>>()?;
            let mut peaks: Vec<usize> = (0..n)
                .filter(|&i| vals[i] >= vals[(i + n - 1) % n] && vals[i] >= vals[(i + 1) % n])
                .collect();
            peaks.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));
            peaks.dedup_by(|a, b| vals[*a] == vals[*b] && (*a + 1) % n == *b);
            peaks.truncate(LOCAL_MAXIMA);
            peaks
                .into_iter()
                .map(|i| {
                    let t0 = step * S::of_usize(i);
                    let (t, v) = golden(|t| obj.value(&angle2(t)), t0 - step, t0 + step);
                    if v > vals[i] {
                        (v, angle2(t))
                    } else {
                        (vals[i], angle2(t0))
                    }
                })
                .collect()
        }
        3 => {
            let pts = sphere_grid::<S>(&SpaceSpec::l2(3), grid.max(64));
            let vals: Vec<S> = pts.points.iter().enumerate().map(|(i, p)| check(i, p)).collect::<Result<_>>()?;
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));
            // greedy well-separated picks; φ and -φ are the same direction
            let sep = S::of(3.6 / (pts.len() as f64).sqrt());
            let mut picks: Vec<usize> = Vec::new();
            for &i in &order {
                let close = picks.iter().any(|&j| {
                    let c = pts.points[i].dot(&pts.points[j]).abs().min(S::one());
                    c.acos() < S::of(4.0) * sep
                });
                if !close {
                    picks.push(i);
                }
                if picks.len() == LOCAL_MAXIMA {
                    break;
                }
            }
            picks
                .into_iter()
                .map(|i| {
                    let (mut th, mut ph) = to_angles3(&pts.points[i]);
                    let mut best = vals[i];
                    let mut h = sep * S::of(2.0);
                    for _ in 0..POLISH_SWEEPS {
                        let (t, v) = golden(|t| obj.value(&angle3(t, ph)), th - h, th + h);
                        if v > best {
                            best = v;
                            th = t;
                        }
                        let (t, v) = golden(|t| obj.value(&angle3(th, t)), ph - h, ph + h);
                        if v > best {
                            best = v;
                            ph = t;
                        }
                        h = h * S::of(0.5);
                    }
                    (best, angle3(th, ph))
                })
                .collect()
        }
        _ => {
            exact.set(false);
            let mut rng = seeded(derive(seed, &[0x7a11]));
            let mut starts: Vec<Vector<S>> = (0..d).map(|j| Vector::basis(d, j)).collect();
            for _ in 0..grid.max(16) {
                starts.push(random_unit(&SpaceSpec::l2(d), &mut rng));
            }
            let mut scored: Vec<(S, Vector<S>)> = starts
                .into_iter()
                .enumerate()
                .map(|(i, p)| check(i, &p).map(|v| (v, p)))
                .collect::<Result<_>>()?;
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            scored.truncate(LOCAL_MAXIMA);
            scored
                .into_iter()
                .map(|(mut best, mut phi)| {
                    let mut h = S::of(0.2);
                    for _ in 0..POLISH_SWEEPS {
                        for j in 0..d {
                            let base = phi.clone();
                            let (t, v) = golden(
                                |t| {
                                    let mut c = base.clone();
                                    c.0[j] = c.0[j] + t;
                                    obj.value(&c)
                                },
                                -h,
                                h,
                            );
                            if v > best {
                                best = v;
                                phi.0[j] = phi.0[j] + t;
                            }
                        }
                        h = h * S::of(0.5);
                    }
                    (best, phi)
                })
                .collect()
        }
    };
    let mut polished = polished;
    polished.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let (value, argmax) = polished[0].clone();
    let maxima = polished.into_iter().skip(1).map(|(_, v)| v).collect();
    Ok(Validation { value, argmax, certified: exact.get() && d <= 3, maxima })
}

/// Default validation grid (directions on a half circle in dimension two,
/// Fibonacci points in dimension three).
pub const DEFAULT_GRID: usize = 720;

/// Recompute the best constant of a fixed measure, ignoring the stored one.
pub fn validate_certificate<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    cert: &DominationCertificate<S>,
    budget: usize,
    seed: u64,
) -> Result<Validation<S>> {
    validate_with_grid(op, cert, DEFAULT_GRID, budget, seed)
}

pub fn validate_with_grid<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    cert: &DominationCertificate<S>,
    grid: usize,
    budget: usize,
    seed: u64,
) -> Result<Validation<S>> {
    if cert.weights.len() != cert.atoms.len() {
        return Err(Error::DimensionMismatch { expected: cert.atoms.len(), found: cert.weights.len() });
    }
    if cert.atoms.space != *op.codomain() {
        return Err(Error::InvalidInput("certificate atoms do not live in the codomain".into()));
    }
    validate_measure(op, &cert.atoms.points, &cert.weights, cert.scheme.pstar, grid, budget, seed)
}

/// Atoms for the codomain ball: extreme points of polytope balls, otherwise
/// a sphere grid; one representative per antipodal pair.
pub fn codomain_atoms<S: Scalar>(space: &SpaceSpec, count: usize) -> BallSample<S> {
    let g = sphere_grid::<S>(space, count);
    let points: Vec<Vector<S>> = g
        .points
        .into_iter()
        .filter(|v| v.0.iter().find(|c| **c != S::zero()).is_some_and(|c| *c > S::zero()))
        .collect();
    BallSample { space: *space, points, kind: g.kind }
}

/// Knobs for [`refine`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub search: SearchConfig,
    /// Atom count before antipodal reduction.
    pub atoms: usize,
    /// Validation grid size.
    pub grid: usize,
    pub max_rounds: usize,
    /// Relative gap between validated constant and LP value at which to stop.
    pub gap_tol: f64,
    /// Directions of `F'` seeded into the initial witness set.
    pub seed_pairs: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            search: SearchConfig::default(),
            atoms: 720,
            grid: DEFAULT_GRID,
            max_rounds: 20,
            gap_tol: 1e-3,
            seed_pairs: 24,
        }
    }
}

fn unit_pair<S: Scalar, T: Operator<S> + ?Sized>(op: &T, phi: &Vector<S>, budget: usize, seed: u64) -> Option<Pair<S>> {
    let fd = op.codomain().dual();
    let n = fd.norm_unchecked(phi);
    if !(n > S::zero()) {
        return None;
    }
    let phi = phi.scaled(S::one() / n);
    let f = form_norm(op, &phi, None, budget, seed);
    let xs: Vec<Vector<S>> = f
        .xs
        .iter()
        .zip(op.domains())
        .map(|(x, d)| {
            let m = d.norm_unchecked(x);
            if m > S::zero() {
                x.scaled(S::one() / m)
            } else {
                x.clone()
            }
        })
        .collect();
    Some(Pair { xs, phi })
}

fn direction_seeds<S: Scalar>(fd: &SpaceSpec, count: usize, seed: u64) -> Vec<Vector<S>> {
    match fd.dim {
        1 => vec![Vector(vec![S::one()])],
        2 => (0..count.max(2))
            .map(|i| angle2(S::of(std::f64::consts::PI * i as f64 / count.max(2) as f64)))
            .collect(),
        3 => sphere_grid::<S>(&SpaceSpec::l2(3), 2 * count.max(4)).points,
        d => {
            let mut rng = seeded(derive(seed, &[0xd1]));
            let mut v: Vec<Vector<S>> = (0..d).map(|j| Vector::basis(d, j)).collect();
            v.extend((0..count).map(|_| random_unit(&SpaceSpec::l2(d), &mut rng)));
            v
        }
    }
}

/// Lower bound from the LP multipliers: `φᵢ = y_w^{1/p*} φ_w` with the
/// optimal profile for `scheme`.
fn dual_witness<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    pairs: &[Pair<S>],
    y: &[S],
    seed: u64,
) -> Option<SummingWitness<S>> {
    let phis: Vec<Vector<S>> = pairs
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > S::zero())
        .map(|(pr, &v)| pr.phi.scaled(scheme.pstar.root(v)))
        .collect();
    if phis.is_empty() {
        return None;
    }
    let prof = form_profile(op, &phis, None, seed);
    Some(profile_witness(op, scheme, &phis, &prof))
}

/// Kelley loop: fit on the current witness set, validate, add the worst
/// violators, until the validated constant and the LP value agree to
/// `gap_tol`. Returns `[witness lower bound, best validated constant]`.
pub fn refine<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    cfg: &RefineConfig,
) -> Result<ConstantEstimate<S>> {
    scheme.check_arity(op.arity())?;
    let search = search_phis(op, scheme.p, &cfg.search);
    let mut est = estimate_from_search(op, scheme, &search, &cfg.search)?;
    refine_from(op, scheme, cfg, &search, &mut est)?;
    Ok(est)
}

pub(crate) fn refine_from<S: Scalar, T: Operator<S> + ?Sized>(
    op: &T,
    scheme: &ExponentScheme,
    cfg: &RefineConfig,
    search: &crate::witness::PhiSearch<S>,
    est: &mut ConstantEstimate<S>,
) -> Result<()> {
    let seed = cfg.search.seed;
    let budget = cfg.search.budget.max(1);
    let cod = *op.codomain();
    let fd = cod.dual();
    let q = scheme.pstar;

    let mut pairs: Vec<Pair<S>> = Vec::new();
    let on = op_norm_argmax(op, budget, derive(seed, &[0x09]));
    if let Some(p) = unit_pair(op, &on.psi, budget, seed) {
        pairs.push(p);
    }
    for (phis, _) in &search.best {
        for phi in phis {
            if let Some(p) = unit_pair(op, phi, budget, seed) {
                pairs.push(p);
            }
        }
    }
    for phi in direction_seeds::<S>(&fd, cfg.seed_pairs, seed) {
        if let Some(p) = unit_pair(op, &phi, budget, seed) {
            pairs.push(p);
        }
    }

    // grid atoms plus the directions of T(x) over the witness terms
    let base = codomain_atoms::<S>(&cod, cfg.atoms);
    let mut points = base.points.clone();
    for pr in &pairs {
        let refs: Vec<&Vector<S>> = pr.xs.iter().collect();
        let y = eval_unchecked(op, &refs);
        if let Some(u) = cod.normalize(&y) {
            let u = match u.0.iter().find(|c| **c != S::zero()) {
                Some(c) if *c < S::zero() => u.scaled(-S::one()),
                _ => u,
            };
            if !points.iter().any(|p| p.0.iter().zip(&u.0).all(|(a, b)| (*a - *b).abs() <= S::tol())) {
                points.push(u);
            }
        }
    }
    let kind = if points.len() == base.points.len() { base.kind } else { BallKind::Heuristic };
    let atoms = BallSample { space: cod, points, kind: if base.kind.is_exact() { base.kind } else { kind } };

    let mut best_upper: Option<(S, DominationCertificate<S>, bool)> = None;
    let mut converged = false;
    let mut lower = est.lower;
    let mut best_witness = est.best_witness.clone();
    let mode = WeakMode::Auto { budget: budget.max(8), seed, resolution: 0 };
    for round in 0..cfg.max_rounds.max(1) {
        let (cert, lp) = fit_pairs(op, scheme, &atoms, &pairs)?;
        if let Some(w) = dual_witness(op, scheme, &pairs, &lp.y, derive(seed, &[round as u64, 0x3d])) {
            if let Ok(r) = ratio(op, &w, scheme, mode) {
                if r.certified && r.value > lower {
                    lower = r.value;
                    best_witness = w;
                }
            }
        }
        let v = validate_measure(op, &atoms.points, &cert.weights, q, cfg.grid, budget, derive(seed, &[round as u64]))?;
        if best_upper.as_ref().is_none_or(|(b, _, _)| v.value < *b) {
            best_upper = Some((v.value, cert.clone(), v.certified));
        }
        let upper = best_upper.as_ref().map(|b| b.0).unwrap();
        if upper - lower <= S::of(cfg.gap_tol) * upper || v.value - lp.constant <= S::of(cfg.gap_tol) * v.value {
            converged = true;
            break;
        }
        let mut added = false;
        for phi in std::iter::once(&v.argmax).chain(&v.maxima) {
            if let Some(p) = unit_pair(op, phi, budget, derive(seed, &[round as u64, 1])) {
                if !pairs.contains(&p) {
                    pairs.push(p);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let (upper, cert, certified) = best_upper.expect("at least one round");
    est.upper_certified = certified;
    est.lower = lower;
    est.best_witness = best_witness;
    est.upper = Some(upper);
    est.certificate = Some(cert);
    est.converged = converged;
    Ok(())
}

/// Convenience for linear maps.
pub fn refine_linear<S: Scalar>(op: &LinearOp<S>, scheme: &ExponentScheme, cfg: &RefineConfig) -> Result<ConstantEstimate<S>> {
    refine(op, scheme, cfg)
}

#[cfg(test)]
mod tests;
