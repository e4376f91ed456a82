//! Strong, weak and Cohen norms of finite vector sequences.
//!
//! * strong: `(Σ‖xᵢ‖^p)^{1/p}`
//! * weak: `sup_{ψ ∈ B_{E'}} (Σ|ψ(xᵢ)|^p)^{1/p}`
//! * Cohen: `sup Σ|φᵢ(xᵢ)|` over dual sequences of weak-`p*` norm at most one.
//!
//! The weak objective is convex in `ψ`, so its supremum sits on extreme
//! points of the dual ball; that gives exact answers for polytope balls. The
//! Cohen problem is a linear objective over the unit ball of the weak-`p*`
//! norm and is solved as a cutting-plane LP whose separation step is a weak
//! norm evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{nuclear_with_polar, spectral_norm, Mat};
use crate::lp::{lp_min, LpOutcome};
use crate::rng::{derive, seeded};
use crate::scalar::Scalar;
use crate::spaces::{lq_of, random_unit, sphere_grid, Exponent, SpaceSpec, Vector, MAX_CUBE_DIM};

/// Multistarts for the weak-norm fixed-point ascent.
pub const WEAK_RESTARTS: usize = 32;
const WEAK_ITERS: usize = 500;
const WEAK_STOP: f64 = 1e-10;

/// Default grid resolutions of the brute-force oracle.
pub const ORACLE_RES_2D: usize = 720;
pub const ORACLE_RES_3D: usize = 64;

/// Largest dimension / length accepted by [`grid_oracle`].
pub const ORACLE_MAX_DIM: usize = 3;
pub const ORACLE_MAX_LEN: usize = 4;

const CUT_ROUNDS: usize = 400;
const CUT_GAP: f64 = 1e-5;

/// A finite sequence `x₁, …, x_m` in one space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VecSequence<S> {
    pub space: SpaceSpec,
    pub items: Vec<Vector<S>>,
}

impl<S: Scalar> VecSequence<S> {
    pub fn new(space: SpaceSpec, items: Vec<Vector<S>>) -> Result<Self> {
        for v in &items {
            space.check(v)?;
        }
        Ok(VecSequence { space, items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn scaled(&self, c: S) -> Self {
        VecSequence { space: self.space, items: self.items.iter().map(|v| v.scaled(c)).collect() }
    }

    fn non_empty(&self) -> Result<()> {
        if self.items.is_empty() {
            Err(Error::EmptySequence)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormMethod {
    Exact,
    ExtremePointEnumeration,
    Spectral,
    AscentHeuristic,
    GridOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate<S> {
    pub value: S,
    pub method: NormMethod,
    pub lower_bound_only: bool,
}

impl<S: Scalar> NormEstimate<S> {
    fn certified(value: S, method: NormMethod) -> Self {
        NormEstimate { value, method, lower_bound_only: false }
    }

    fn heuristic(value: S) -> Self {
        NormEstimate { value, method: NormMethod::AscentHeuristic, lower_bound_only: true }
    }

    /// Exact, spectral, enumerated or oracle-resolved.
    pub fn is_certified(&self) -> bool {
        !self.lower_bound_only
    }
}

/// `(Σ‖xᵢ‖^p)^{1/p}`.
pub fn strong_norm<S: Scalar>(seq: &VecSequence<S>, p: Exponent) -> Result<NormEstimate<S>> {
    seq.non_empty()?;
    Ok(NormEstimate::certified(strong_value(&seq.space, &seq.items, p), NormMethod::Exact))
}

pub(crate) fn strong_value<S: Scalar>(space: &SpaceSpec, items: &[Vector<S>], p: Exponent) -> S {
    lq_of(items.iter().map(|x| space.norm_unchecked(x)), p)
}

/// How the weak norm inside a larger computation is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum WeakMode<'a, S> {
    /// Exact path when one exists, else the grid oracle for dimension ≤ 3,
    /// else multistart ascent.
    Auto { budget: usize, seed: u64, resolution: usize },
    /// Exact path when one exists, else ascent; never the grid.
    NoGrid { budget: usize, seed: u64 },
    /// Supremum over the given unit-ball points of the dual space.
    Atoms(&'a [Vector<S>]),
}

impl<S> WeakMode<'_, S> {
    pub fn auto(budget: usize, seed: u64) -> Self {
        WeakMode::Auto { budget, seed, resolution: 0 }
    }
}

/// A weak-norm value together with a maximizing dual-ball point.
#[derive(Clone, Debug)]
pub(crate) struct WeakArgmax<S> {
    pub value: S,
    pub argmax: Vector<S>,
    pub method: NormMethod,
}

fn weak_at<S: Scalar>(items: &[Vector<S>], psi: &Vector<S>, p: Exponent) -> S {
    lq_of(items.iter().map(|x| psi.dot(x).abs()), p)
}

fn max_over<S: Scalar>(items: &[Vector<S>], points: &[Vector<S>], p: Exponent) -> (S, usize) {
    let mut best = (S::neg_infinity(), 0);
    for (k, psi) in points.iter().enumerate() {
        let v = weak_at(items, psi, p);
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

/// Exact weak-norm paths: a single element, `p = ∞`, polytope dual balls, and
/// the Euclidean `p = 2` case via the largest singular value.
pub(crate) fn weak_exact<S: Scalar>(
    space: &SpaceSpec,
    items: &[Vector<S>],
    p: Exponent,
) -> Option<WeakArgmax<S>> {
    let dual = space.dual();
    if items.len() == 1 || p.is_infinite() {
        let (k, _) = items
            .iter()
            .enumerate()
            .map(|(k, x)| (k, space.norm_unchecked(x)))
            .fold((0, S::neg_infinity()), |a, b| if b.1 > a.1 { b } else { a });
        let psi = dual.norming_unchecked(&items[k]);
        return Some(WeakArgmax {
            value: weak_at(items, &psi, p),
            argmax: psi,
            method: NormMethod::Exact,
        });
    }
    let polytope = dual.exponent.is(1.0) || (dual.exponent.is_infinite() && dual.dim <= MAX_CUBE_DIM);
    if polytope {
        let grid = sphere_grid::<S>(&dual, 0);
        let (value, k) = max_over(items, &grid.points, p);
        return Some(WeakArgmax {
            value,
            argmax: grid.points[k].clone(),
            method: NormMethod::ExtremePointEnumeration,
        });
    }
    if dual.exponent.is(2.0) && p.is(2.0) {
        let m = Mat::from_rows(&items.iter().map(|v| v.0.clone()).collect::<Vec<_>>());
        let (_, _, v) = crate::linalg::top_singular(&m);
        let psi = Vector(v);
        let value = spectral_norm(&m);
        return Some(WeakArgmax { value, argmax: psi, method: NormMethod::Spectral });
    }
    None
}

/// Fixed-point ascent `ψ ← J(Σ sign(aᵢ)|aᵢ|^{p-1} xᵢ)`, `aᵢ = ψ(xᵢ)`, where `J`
/// is the duality map onto the dual unit sphere. Each step maximizes the
/// linearization of a convex objective, so values never decrease.
pub(crate) fn weak_ascent<S: Scalar>(
    space: &SpaceSpec,
    items: &[Vector<S>],
    p: Exponent,
    budget: usize,
    seed: u64,
) -> WeakArgmax<S> {
    let dual = space.dual();
    let mut starts: Vec<Vector<S>> = items.iter().map(|x| dual.norming_unchecked(x)).collect();
    for j in 0..space.dim {
        starts.push(Vector::basis(space.dim, j));
    }
    let mut rng = seeded(derive(seed, &[0x3ea6]));
    while starts.len() < budget.max(1) {
        starts.push(random_unit(&dual, &mut rng));
    }
    starts.truncate(budget.max(1).max(items.len()));

    let mut best = WeakArgmax { value: S::neg_infinity(), argmax: starts[0].clone(), method: NormMethod::AscentHeuristic };
    for start in starts {
        let (value, psi) = ascend_from(space, items, p, start);
        if value > best.value {
            best.value = value;
            best.argmax = psi;
        }
    }
    best
}

fn ascend_from<S: Scalar>(space: &SpaceSpec, items: &[Vector<S>], p: Exponent, start: Vector<S>) -> (S, Vector<S>) {
    let dual = space.dual();
    let pm1 = match p {
        Exponent::Finite(q) => q - 1.0,
        Exponent::Infinite => 0.0,
    };
    let mut psi = start;
    let mut value = weak_at(items, &psi, p);
    for _ in 0..WEAK_ITERS {
        let mut grad = Vector::zeros(space.dim);
        for x in items {
            let a = psi.dot(x);
            let w = if pm1 == 0.0 { a.signum() } else { a.signum() * a.abs().powf(S::of(pm1)) };
            if a != S::zero() {
                grad = grad.axpy(w, x);
            }
        }
        if grad.is_zero() {
            break;
        }
        let next = dual.norming_unchecked(&grad);
        let v = weak_at(items, &next, p);
        if v <= value * (S::one() + S::of(WEAK_STOP)) {
            if v > value {
                psi = next;
                value = v;
            }
            break;
        }
        psi = next;
        value = v;
    }
    (value, psi)
}

fn oracle_count(dim: usize, resolution: usize) -> usize {
    match dim {
        0..=2 => resolution,
        _ => resolution * resolution,
    }
}

fn default_resolution(dim: usize) -> usize {
    if dim <= 2 {
        ORACLE_RES_2D
    } else {
        ORACLE_RES_3D
    }
}

pub(crate) fn weak_with<S: Scalar>(
    space: &SpaceSpec,
    items: &[Vector<S>],
    p: Exponent,
    mode: WeakMode<'_, S>,
) -> WeakArgmax<S> {
    match mode {
        WeakMode::Atoms(points) => {
            let (value, k) = max_over(items, points, p);
            WeakArgmax { value, argmax: points[k].clone(), method: NormMethod::GridOracle }
        }
        WeakMode::Auto { budget, seed, resolution } => {
            if let Some(e) = weak_exact(space, items, p) {
                return e;
            }
            if space.dim <= ORACLE_MAX_DIM {
                let res = if resolution == 0 { default_resolution(space.dim) } else { resolution };
                let grid = sphere_grid::<S>(&space.dual(), oracle_count(space.dim, res));
                let (value, k) = max_over(items, &grid.points, p);
                // the ascent never decreases the value, so the polished point
                // stays at or above the grid maximum
                let (polished, psi) = ascend_from(space, items, p, grid.points[k].clone());
                let (value, argmax) = if polished > value { (polished, psi) } else { (value, grid.points[k].clone()) };
                return WeakArgmax { value, argmax, method: NormMethod::GridOracle };
            }
            weak_ascent(space, items, p, budget, seed)
        }
        WeakMode::NoGrid { budget, seed } => {
            weak_exact(space, items, p).unwrap_or_else(|| weak_ascent(space, items, p, budget, seed))
        }
    }
}

/// Weak `ℓp` norm over the dual unit ball.
///
/// Exact for single elements, `p = ∞`, dual balls `ℓ1` / `ℓ∞` (dim ≤ 20) and
/// Euclidean duals with `p = 2`; otherwise the best of `budget` fixed-point
/// ascents, flagged as a lower bound.
pub fn weak_norm<S: Scalar>(
    seq: &VecSequence<S>,
    p: Exponent,
    budget: usize,
    seed: u64,
) -> Result<NormEstimate<S>> {
    seq.non_empty()?;
    if budget == 0 {
        return Err(Error::BudgetTooSmall { budget, required: 1 });
    }
    let r = weak_with(&seq.space, &seq.items, p, WeakMode::NoGrid { budget, seed });
    Ok(match r.method {
        NormMethod::AscentHeuristic => NormEstimate::heuristic(r.value),
        m => NormEstimate::certified(r.value, m),
    })
}

/// Outcome of a Cohen-norm maximization.
#[derive(Clone, Debug)]
pub(crate) struct CohenSolution<S> {
    /// Value attained by `phis`, whose weak-`p*` norm under the separation
    /// oracle is one.
    pub value: S,
    pub phis: Vec<Vector<S>>,
    pub method: NormMethod,
}

/// Separation oracle for the weak-`p*` unit ball of dual sequences.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Separation {
    /// Supremum over a grid on `S_E` (exact on polytope balls).
    Grid(usize),
    /// Exact paths, else ascent.
    Auto { budget: usize, seed: u64 },
}

/// `sup Σ φᵢ(yᵢ)` subject to `‖(φᵢ)‖_{w,p*} ≤ 1`, `φᵢ ∈ E'`.
pub(crate) fn cohen_maximize<S: Scalar>(
    space: &SpaceSpec,
    items: &[Vector<S>],
    p: Exponent,
    sep: Separation,
) -> Result<CohenSolution<S>> {
    cohen_maximize_impl(space, items, p, sep, true, CUT_ROUNDS, CUT_GAP)
}

/// [`cohen_maximize`] with a cap on cutting-plane rounds and a looser gap,
/// for inner loops that only need an improving direction.
pub(crate) fn cohen_maximize_rough<S: Scalar>(
    space: &SpaceSpec,
    items: &[Vector<S>],
    p: Exponent,
    sep: Separation,
    rounds: usize,
    gap: f64,
) -> Result<CohenSolution<S>> {
    cohen_maximize_impl(space, items, p, sep, true, rounds, gap)
}

// The oracle passes `spectral = false` so that it never shares the
// nuclear-norm path it is meant to check.
fn cohen_maximize_impl<S: Scalar>(
    space: &SpaceSpec,
    items: &[Vector<S>],
    p: Exponent,
    sep: Separation,
    spectral: bool,
    rounds: usize,
    gap: f64,
) -> Result<CohenSolution<S>> {
    let pstar = p.conjugate();
    let dual = space.dual();
    let m = items.len();
    let d = space.dim;
    let zero = || CohenSolution {
        value: S::zero(),
        phis: vec![Vector::zeros(d); m],
        method: NormMethod::Exact,
    };
    if items.iter().all(|y| y.is_zero()) {
        return Ok(zero());
    }
    if m == 1 {
        let value = space.norm_unchecked(&items[0]);
        let phis = vec![dual.norming_unchecked(&items[0])];
        return Ok(CohenSolution { value, phis, method: NormMethod::Exact });
    }

    // Hilbert case: weak-2 norm of (φᵢ) is the operator norm of the matrix
    // with rows φᵢ, so the supremum is the nuclear norm of Y and the polar
    // factor attains it.
    if spectral && space.exponent.is(2.0) && p.is(2.0) {
        let y = Mat::from_rows(&items.iter().map(|v| v.0.clone()).collect::<Vec<_>>());
        let (nuclear, q) = nuclear_with_polar(&y);
        let phis = (0..m).map(|i| Vector(q.data[i * d..(i + 1) * d].to_vec())).collect();
        return Ok(CohenSolution { value: nuclear, phis, method: NormMethod::Spectral });
    }

    let grid = match sep {
        Separation::Grid(count) => Some(sphere_grid::<S>(space, count)),
        Separation::Auto { .. } => None,
    };
    let separate = |phis: &[Vector<S>]| -> WeakArgmax<S> {
        match (&grid, sep) {
            (Some(g), _) => weak_with(&dual, phis, pstar, WeakMode::Atoms(&g.points)),
            (None, Separation::Auto { budget, seed }) => weak_with(&dual, phis, pstar, WeakMode::NoGrid { budget, seed }),
            _ => unreachable!(),
        }
    };
    let method = match (&grid, sep) {
        (Some(g), _) if g.kind.is_exact() => NormMethod::ExtremePointEnumeration,
        (Some(_), _) => NormMethod::GridOracle,
        (None, _) => {
            if weak_exact(&dual, &[Vector::<S>::basis(d, 0), Vector::basis(d, 0)], pstar).is_some() {
                NormMethod::ExtremePointEnumeration
            } else {
                NormMethod::AscentHeuristic
            }
        }
    };

    // Norming candidate φᵢ = cᵢ fᵢ with fᵢ norming yᵢ; its value is the strong
    // p-norm, so the search never reports less than that.
    let strong = strong_value(space, items, p);
    let mut best_phis: Vec<Vector<S>> = {
        let pm1 = match p {
            Exponent::Finite(q) => q - 1.0,
            Exponent::Infinite => 0.0,
        };
        items
            .iter()
            .map(|y| {
                let ny = space.norm_unchecked(y);
                if ny == S::zero() {
                    return Vector::zeros(d);
                }
                let c = if pm1 == 0.0 {
                    S::one()
                } else {
                    (ny / strong).powf(S::of(pm1))
                };
                space.dual().norming_unchecked(y).scaled(c)
            })
            .collect()
    };
    let objective = |phis: &[Vector<S>]| -> S { phis.iter().zip(items).map(|(f, y)| f.dot(y)).sum() };
    let mut best_value = {
        let w = separate(&best_phis).value;
        let v = objective(&best_phis) / w;
        best_phis = best_phis.iter().map(|f| f.scaled(S::one() / w)).collect();
        v
    };

    // LP over φ = u - v, u, v ≥ 0; cuts Σᵢ aᵢ φᵢ(g) ≤ 1.
    let nv = m * d;
    let mut c = vec![S::zero(); 2 * nv];
    for i in 0..m {
        for j in 0..d {
            c[i * d + j] = -items[i].0[j];
            c[nv + i * d + j] = items[i].0[j];
        }
    }
    let mut rows: Vec<Vec<S>> = Vec::new();
    let push_cut = |rows: &mut Vec<Vec<S>>, a: &[S], g: &Vector<S>| {
        let mut row = vec![S::zero(); 2 * nv];
        for i in 0..m {
            for j in 0..d {
                let w = a[i] * g.0[j];
                row[i * d + j] = w;
                row[nv + i * d + j] = -w;
            }
        }
        rows.push(row);
    };
    for i in 0..m {
        for j in 0..d {
            for s in [S::one(), -S::one()] {
                let mut a = vec![S::zero(); m];
                a[i] = s;
                push_cut(&mut rows, &a, &Vector::basis(d, j));
            }
        }
    }
    let seq_space = SpaceSpec { dim: m, exponent: p };
    let mut upper = S::infinity();
    for _ in 0..rounds {
        let b = vec![S::one(); rows.len()];
        let sol = match lp_min(&c, &rows, &b)? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Unbounded { .. } => return Err(Error::Unbounded),
            LpOutcome::Infeasible => return Err(Error::Infeasible { witness: 0 }),
        };
        upper = upper.min(-sol.objective);
        let phis: Vec<Vector<S>> = (0..m)
            .map(|i| Vector((0..d).map(|j| sol.x[i * d + j] - sol.x[nv + i * d + j]).collect()))
            .collect();
        let sepr = separate(&phis);
        let obj = objective(&phis);
        if sepr.value > S::zero() {
            let v = obj / sepr.value;
            if v > best_value {
                best_value = v;
                best_phis = phis.iter().map(|f| f.scaled(S::one() / sepr.value)).collect();
            }
        }
        if sepr.value <= S::one() + S::of(1e-12) || upper - best_value <= S::of(gap) * upper {
            break;
        }
        let coeffs = Vector(phis.iter().map(|f| f.dot(&sepr.argmax)).collect());
        let a = seq_space.norming_unchecked(&coeffs);
        push_cut(&mut rows, &a.0, &sepr.argmax);
    }
    Ok(CohenSolution { value: best_value, phis: best_phis, method })
}

/// Cohen `ℓp⟨E⟩` norm, `1 < p ≤ ∞`.
///
/// Exact (nuclear norm) for `ℓ2` with `p = 2`; certified by the grid oracle
/// for dimension ≤ 3 and length ≤ 4; certified by enumeration for polytope
/// balls; otherwise an ascent lower bound.
pub fn cohen_norm<S: Scalar>(
    seq: &VecSequence<S>,
    p: Exponent,
    budget: usize,
    seed: u64,
) -> Result<NormEstimate<S>> {
    seq.non_empty()?;
    if p.is(1.0) {
        return Err(Error::InvalidInput("Cohen norm needs p > 1".into()));
    }
    if budget == 0 {
        return Err(Error::BudgetTooSmall { budget, required: 1 });
    }
    let small = seq.space.dim <= ORACLE_MAX_DIM && seq.len() <= ORACLE_MAX_LEN;
    let sep = if small && !(seq.space.exponent.is(2.0) && p.is(2.0)) {
        Separation::Grid(oracle_count(seq.space.dim, default_resolution(seq.space.dim)))
    } else {
        Separation::Auto { budget, seed }
    };
    let sol = cohen_maximize(&seq.space, &seq.items, p, sep)?;
    Ok(match sol.method {
        NormMethod::AscentHeuristic => NormEstimate::heuristic(sol.value),
        m => NormEstimate::certified(sol.value, m),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    Weak,
    Cohen,
}

/// Brute-force reference for the weak and Cohen norms on small problems.
///
/// Weak: maximum over a deterministic grid of the dual sphere (`resolution`
/// angles in dimension two, `resolution²` Fibonacci points in dimension
/// three). Cohen: the dual-sequence ball is cut out by the same kind of grid
/// on `S_E` and the linear objective is maximized over it exactly by cutting
/// planes, independent of the spectral formula used by [`cohen_norm`].
pub fn grid_oracle<S: Scalar>(
    kind: OracleKind,
    seq: &VecSequence<S>,
    p: Exponent,
    resolution: usize,
) -> Result<NormEstimate<S>> {
    seq.non_empty()?;
    let dim = seq.space.dim;
    if dim > ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!("grid oracle needs dim ≤ {ORACLE_MAX_DIM}, got {dim}")));
    }
    if seq.len() > ORACLE_MAX_LEN {
        return Err(Error::InvalidInput(format!(
            "grid oracle needs length ≤ {ORACLE_MAX_LEN}, got {}",
            seq.len()
        )));
    }
    let min_res = if dim <= 2 { 90 } else { 16 };
    if resolution < min_res {
        return Err(Error::BudgetTooSmall { budget: resolution, required: min_res });
    }
    let count = oracle_count(dim, resolution);
    let value = match kind {
        OracleKind::Weak => {
            let grid = sphere_grid::<S>(&seq.space.dual(), count);
            max_over(&seq.items, &grid.points, p).0
        }
        OracleKind::Cohen => {
            if p.is(1.0) {
                return Err(Error::InvalidInput("Cohen norm needs p > 1".into()));
            }
            cohen_grid(&seq.space, &seq.items, p, count)?
        }
    };
    Ok(NormEstimate::certified(value, NormMethod::GridOracle))
}

fn cohen_grid<S: Scalar>(space: &SpaceSpec, items: &[Vector<S>], p: Exponent, count: usize) -> Result<S> {
    Ok(cohen_maximize_impl(space, items, p, Separation::Grid(count), false, CUT_ROUNDS, CUT_GAP)?.value)
}
