//! Finite-dimensional real spaces `ℓq^n`, their duals, and finite stand-ins
//! for unit balls.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::scalar::Scalar;

/// Largest dimension for which the `2^dim` vertices of an `ℓ∞` ball are
/// enumerated.
pub const MAX_CUBE_DIM: usize = 20;

/// Exponent of an `ℓq` norm, `1 ≤ q ≤ ∞`. Serialized as its display
/// string (`"2"`, `"1.5"`, `"inf"`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    /// Validated finite exponent.
    pub fn finite(q: f64) -> Result<Self> {
        if q.is_finite() && q >= 1.0 {
            Ok(Exponent::Finite(q))
        } else {
            Err(Error::InvalidInput(format!("exponent {q} outside [1, ∞)")))
        }
    }

    /// The conjugate exponent `q*` with `1/q + 1/q* = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinite => Exponent::ONE,
            Exponent::Finite(q) if q == 1.0 => Exponent::Infinite,
            Exponent::Finite(q) => Exponent::Finite(q / (q - 1.0)),
        }
    }

    /// `1/q`, zero for `∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Infinite => 0.0,
            Exponent::Finite(q) => 1.0 / q,
        }
    }

    /// Exponent with the given reciprocal; `0` maps to `∞`.
    pub fn from_reciprocal(r: f64) -> Result<Self> {
        if r == 0.0 {
            Ok(Exponent::Infinite)
        } else {
            Exponent::finite(1.0 / r)
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn is(self, q: f64) -> bool {
        matches!(self, Exponent::Finite(v) if v == q)
    }

    /// Scale a finite exponent, `∞` stays `∞`.
    pub fn times(self, k: f64) -> Self {
        match self {
            Exponent::Infinite => Exponent::Infinite,
            Exponent::Finite(q) => Exponent::Finite(q * k),
        }
    }

    /// `|v|^q` for finite `q`; callers handle `∞` separately.
    pub(crate) fn pow<S: Scalar>(self, v: S) -> S {
        match self {
            Exponent::Finite(q) if q == 1.0 => v,
            Exponent::Finite(q) if q == 2.0 => v * v,
            Exponent::Finite(q) => v.powf(S::of(q)),
            Exponent::Infinite => v,
        }
    }

    pub(crate) fn root<S: Scalar>(self, v: S) -> S {
        match self {
            Exponent::Finite(q) if q == 1.0 => v,
            Exponent::Finite(q) if q == 2.0 => v.sqrt(),
            Exponent::Finite(q) => v.powf(S::of(1.0 / q)),
            Exponent::Infinite => v,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => write!(f, "inf"),
            Exponent::Finite(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts decimals, rational literals such as `4/3`, and `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinite),
            _ => {}
        }
        let value = if let Some((n, d)) = t.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| bad_exponent(s))?;
            let d: f64 = d.trim().parse().map_err(|_| bad_exponent(s))?;
            if d == 0.0 {
                return Err(bad_exponent(s));
            }
            n / d
        } else {
            t.parse().map_err(|_| bad_exponent(s))?
        };
        Exponent::finite(value)
    }
}

impl From<Exponent> for String {
    fn from(q: Exponent) -> String {
        q.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn bad_exponent(s: &str) -> Error {
    Error::InvalidInput(format!("cannot parse exponent {s:?}"))
}

/// `(Σ vᵢ^q)^{1/q}` of nonnegative magnitudes, `max vᵢ` for `q = ∞`.
///
/// Every sequence norm in the crate funnels through here so that distinct
/// code paths over the same magnitudes agree bit for bit.
pub fn lq_of<S: Scalar>(magnitudes: impl IntoIterator<Item = S>, q: Exponent) -> S {
    match q {
        Exponent::Infinite => magnitudes.into_iter().fold(S::zero(), S::max),
        _ => {
            let sum: S = magnitudes.into_iter().map(|v| q.pow(v)).sum();
            q.root(sum)
        }
    }
}

/// A finite-dimensional real normed space `ℓq^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dim: usize,
    pub exponent: Exponent,
}

impl SpaceSpec {
    pub fn new(dim: usize, exponent: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("space dimension must be positive".into()));
        }
        if let Exponent::Finite(q) = exponent {
            Exponent::finite(q)?;
        }
        Ok(SpaceSpec { dim, exponent })
    }

    pub fn l1(dim: usize) -> Self {
        SpaceSpec { dim, exponent: Exponent::ONE }
    }

    pub fn l2(dim: usize) -> Self {
        SpaceSpec { dim, exponent: Exponent::TWO }
    }

    pub fn linf(dim: usize) -> Self {
        SpaceSpec { dim, exponent: Exponent::Infinite }
    }

    /// The dual `ℓ_{q*}^dim`.
    pub fn dual(&self) -> SpaceSpec {
        SpaceSpec { dim: self.dim, exponent: self.exponent.conjugate() }
    }

    /// Norm of `v` in this space.
    pub fn norm<S: Scalar>(&self, v: &Vector<S>) -> Result<S> {
        self.check(v)?;
        Ok(self.norm_unchecked(v))
    }

    pub(crate) fn norm_unchecked<S: Scalar>(&self, v: &Vector<S>) -> S {
        lq_of(v.0.iter().map(|x| x.abs()), self.exponent)
    }

    pub(crate) fn check<S: Scalar>(&self, v: &Vector<S>) -> Result<()> {
        if v.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() })
        }
    }

    fn is_hilbert(&self) -> bool {
        self.exponent.is(2.0)
    }

    /// Unit vector `x` of this space norming the functional `f ∈ dual()`:
    /// `⟨f, x⟩ = ‖f‖_{dual}`.
    ///
    /// For `f = 0` the first basis vector is returned.
    pub fn norming_vector<S: Scalar>(&self, f: &Vector<S>) -> Result<Vector<S>> {
        self.check(f)?;
        Ok(self.norming_unchecked(f))
    }

    pub(crate) fn norming_unchecked<S: Scalar>(&self, f: &Vector<S>) -> Vector<S> {
        let n = self.dim;
        let dual_norm = self.dual().norm_unchecked(f);
        if dual_norm == S::zero() {
            return Vector::basis(n, 0);
        }
        let sign = |v: S| if v < S::zero() { -S::one() } else { S::one() };
        let x = match self.exponent {
            Exponent::Finite(q) if q == 1.0 => {
                let mut best = 0;
                for (j, v) in f.0.iter().enumerate() {
                    if v.abs() > f.0[best].abs() {
                        best = j;
                    }
                }
                let mut x = Vector::zeros(n);
                x.0[best] = sign(f.0[best]);
                x
            }
            Exponent::Infinite => Vector(f.0.iter().map(|&v| sign(v)).collect()),
            Exponent::Finite(q) => {
                // xⱼ = sign(fⱼ)|fⱼ|^{q*-1} / ‖f‖^{q*-1}
                let qs = q / (q - 1.0);
                let e = S::of(qs - 1.0);
                Vector(f.0.iter().map(|&v| sign(v) * (v.abs() / dual_norm).powf(e)).collect())
            }
        };
        // Rounding in the power map leaves ‖x‖ a few ulps away from one.
        let nx = self.norm_unchecked(&x);
        x.scaled(S::one() / nx)
    }

    /// Rescale a nonzero vector onto the unit sphere.
    pub fn normalize<S: Scalar>(&self, v: &Vector<S>) -> Option<Vector<S>> {
        let n = self.norm_unchecked(v);
        if n > S::zero() && n.is_finite() {
            Some(v.scaled(S::one() / n))
        } else {
            None
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}^{}", self.exponent, self.dim)
    }
}

/// Coordinates of a point (or of a functional, in the dual space).
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<S>(pub Vec<S>);

impl<S: Scalar> Vector<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![S::zero(); dim])
    }

    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[j] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn scaled(&self, c: S) -> Self {
        Vector(self.0.iter().map(|&v| v * c).collect())
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: S, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| a + c * b).collect())
    }

    pub fn dot(&self, other: &Self) -> S {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == S::zero())
    }

    pub fn euclidean(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn cast<T: Scalar>(&self) -> Vector<T> {
        Vector(self.0.iter().map(|v| T::of(v.to_f64_lossy())).collect())
    }
}

impl<S: Scalar> From<Vec<S>> for Vector<S> {
    fn from(v: Vec<S>) -> Self {
        Vector(v)
    }
}

/// Norm of `v` in `space`.
pub fn norm<S: Scalar>(space: &SpaceSpec, v: &Vector<S>) -> Result<S> {
    space.norm(v)
}

/// The conjugate space.
pub fn dual(space: &SpaceSpec) -> SpaceSpec {
    space.dual()
}

/// Dual action `f(x) = Σ fⱼ xⱼ`.
pub fn pairing<S: Scalar>(f: &Vector<S>, x: &Vector<S>) -> Result<S> {
    if f.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x.dim() });
    }
    Ok(f.dot(x))
}

/// How a [`BallSample`] relates to the ball it stands in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallKind {
    /// Every extreme point of a polytope ball (`ℓ1`, or `ℓ∞` in low dimension).
    ExtremePoints,
    /// Equally spaced points of the Euclidean circle.
    CircleFrame,
    /// Deterministic grid or pseudo-random sample of the sphere.
    Heuristic,
}

impl BallKind {
    pub fn is_exact(self) -> bool {
        matches!(self, BallKind::ExtremePoints)
    }
}

/// Finite set of unit-norm points of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSample<S> {
    pub space: SpaceSpec,
    pub points: Vec<Vector<S>>,
    pub kind: BallKind,
}

impl<S: Scalar> BallSample<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn cross_polytope<S: Scalar>(dim: usize) -> Vec<Vector<S>> {
    let mut pts = Vec::with_capacity(2 * dim);
    for j in 0..dim {
        pts.push(Vector::basis(dim, j));
        pts.push(Vector::basis(dim, j).scaled(-S::one()));
    }
    pts
}

fn cube_vertices<S: Scalar>(dim: usize, limit: usize) -> Vec<Vector<S>> {
    let total = 1usize << dim;
    (0..total.min(limit))
        .map(|mask| {
            Vector(
                (0..dim)
                    .map(|j| if mask >> j & 1 == 1 { -S::one() } else { S::one() })
                    .collect(),
            )
        })
        .collect()
}

fn circle<S: Scalar>(space: &SpaceSpec, count: usize) -> Vec<Vector<S>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            let v = Vector(vec![S::of(t.cos()), S::of(t.sin())]);
            space.normalize(&v).expect("circle point is nonzero")
        })
        .collect()
}

fn fibonacci<S: Scalar>(space: &SpaceSpec, count: usize) -> Vec<Vector<S>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            let v = Vector(vec![S::of(r * t.cos()), S::of(r * t.sin()), S::of(z)]);
            space.normalize(&v).expect("sphere point is nonzero")
        })
        .collect()
}

fn random_sphere<S: Scalar>(space: &SpaceSpec, count: usize, seed: u64) -> Vec<Vector<S>> {
    let mut rng = seeded(seed);
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let v: Vector<S> =
            Vector((0..space.dim).map(|_| S::of(rng.sample::<f64, _>(StandardNormal))).collect());
        if let Some(u) = space.normalize(&v) {
            pts.push(u);
        }
    }
    pts
}

/// Finite subset of the unit sphere standing in for the unit ball.
///
/// `ℓ1` yields the `2·dim` vertices, `ℓ∞` (dim ≤ 20) its sign vectors up to
/// `budget`, `ℓ2` in dimension two `budget` equally spaced angles; anything
/// else a pseudo-random sample reproducible from `seed`.
pub fn ball_points<S: Scalar>(space: &SpaceSpec, budget: usize, seed: u64) -> Result<BallSample<S>> {
    let required = 2 * space.dim;
    if budget < required {
        return Err(Error::BudgetTooSmall { budget, required });
    }
    let (points, kind) = match space.exponent {
        Exponent::Finite(q) if q == 1.0 => (cross_polytope(space.dim), BallKind::ExtremePoints),
        Exponent::Infinite if space.dim <= MAX_CUBE_DIM => {
            let complete = (1usize << space.dim) <= budget;
            let kind = if complete { BallKind::ExtremePoints } else { BallKind::Heuristic };
            (cube_vertices(space.dim, budget), kind)
        }
        _ if space.is_hilbert() && space.dim == 2 => (circle(space, budget), BallKind::CircleFrame),
        _ => (random_sphere(space, budget, seed), BallKind::Heuristic),
    };
    Ok(BallSample { space: *space, points, kind })
}

/// Deterministic grid on the unit sphere with about `count` points.
///
/// Polytope balls return their extreme points regardless of `count`; the
/// circle gets `count` angles, the 2-sphere `count` Fibonacci points (both
/// renormalized into the space's own norm). Higher dimensions fall back to a
/// fixed-seed random sample.
pub fn sphere_grid<S: Scalar>(space: &SpaceSpec, count: usize) -> BallSample<S> {
    let count = count.max(2 * space.dim);
    if space.dim == 1 {
        return BallSample {
            space: *space,
            points: cross_polytope(1),
            kind: BallKind::ExtremePoints,
        };
    }
    match space.exponent {
        Exponent::Finite(q) if q == 1.0 => BallSample {
            space: *space,
            points: cross_polytope(space.dim),
            kind: BallKind::ExtremePoints,
        },
        Exponent::Infinite if space.dim <= MAX_CUBE_DIM => BallSample {
            space: *space,
            points: cube_vertices(space.dim, usize::MAX),
            kind: BallKind::ExtremePoints,
        },
        _ => {
            let points = match space.dim {
                2 => circle(space, count),
                3 => fibonacci(space, count),
                _ => random_sphere(space, count, 0x5eed_0f_57_4e4e),
            };
            let kind = if space.is_hilbert() && space.dim == 2 {
                BallKind::CircleFrame
            } else {
                BallKind::Heuristic
            };
            BallSample { space: *space, points, kind }
        }
    }
}

/// Pseudo-random unit vector.
pub(crate) fn random_unit<S: Scalar, R: Rng>(space: &SpaceSpec, rng: &mut R) -> Vector<S> {
    loop {
        let v: Vector<S> =
            Vector((0..space.dim).map(|_| S::of(rng.sample::<f64, _>(StandardNormal))).collect());
        if let Some(u) = space.normalize(&v) {
            return u;
        }
    }
}
