//! Abstract domination: maps `R₁,…,R_t` and `S` supplied as closures, with
//! the same LP and validation as the concrete certificates.
//!
//! Every `R_k` with `k < t` must ignore its ball point; only the last one is
//! integrated against a measure. The lower bound is
//! `(Σᵢ S(pᵢ)^{p₀})^{1/p₀} / Π_k sup_{ψ∈K_k} (Σᵢ R_k(ψ,pᵢ)^{p_k})^{1/p_k}`
//! with `1/p₀ = Σ 1/p_k`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::operators::{eval_unchecked, Operator};
use crate::rng::{derive, seeded};
use crate::scalar::Scalar;
use crate::spaces::{lq_of, BallSample, Exponent, SpaceSpec, Vector};
use crate::witness::SummingWitness;

use super::{domination_lp, powq};

/// A data point: variables `x` and one auxiliary vector per `R_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractPoint<S> {
    pub x: Vec<Vector<S>>,
    pub b: Vec<Vector<S>>,
}

type REval<'a, S> = Box<dyn Fn(&Vector<S>, &[Vector<S>], &Vector<S>) -> S + 'a>;
type SEval<'a, S, F> = Box<dyn Fn(&F, &[Vector<S>], &[Vector<S>]) -> S + 'a>;

/// `R_k(ψ, x, b_k)` with its exponent and ball sample `K_k`.
pub struct RMap<'a, S> {
    pub eval: REval<'a, S>,
    pub phi_independent: bool,
    pub exponent: Exponent,
    pub sample: BallSample<S>,
}

pub struct AbstractProblem<'a, S, F: ?Sized> {
    pub rs: Vec<RMap<'a, S>>,
    /// `S(f, x, b₁, …, b_t)`.
    pub s: SEval<'a, S, F>,
}

/// Bracket from [`abstract_bounds`].
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractBounds<S> {
    pub lower: S,
    /// Index of the family attaining `lower`.
    pub best_family: usize,
    pub lp_constant: S,
    pub weights: Vec<S>,
    /// Validated constant of the fitted measure over the probes.
    pub upper: Option<S>,
}

impl<'a, S: Scalar, F: ?Sized> AbstractProblem<'a, S, F> {
    /// `p₀` from `1/p₀ = Σ 1/p_k`, after checking that only the last map
    /// depends on the ball point.
    pub fn check_hypotheses(&self) -> Result<Exponent> {
        let t = self.rs.len();
        if t == 0 {
            return Err(Error::HypothesisViolation("no R maps".into()));
        }
        if let Some(k) = self.rs[..t - 1].iter().position(|r| !r.phi_independent) {
            return Err(Error::HypothesisViolation(format!("R_{} depends on the ball point", k + 1)));
        }
        if self.rs[t - 1].sample.is_empty() {
            return Err(Error::HypothesisViolation("last R map has an empty ball sample".into()));
        }
        let r: f64 = self.rs.iter().map(|r| r.exponent.reciprocal()).sum();
        if r > 1.0 + 1e-12 {
            return Err(Error::ExponentIdentity(format!("Σ 1/p_k = {r} exceeds 1")));
        }
        Exponent::from_reciprocal(r.min(1.0))
    }

    fn r_at(&self, k: usize, psi: &Vector<S>, pt: &AbstractPoint<S>) -> S {
        (self.rs[k].eval)(psi, &pt.x, &pt.b[k])
    }

    fn anchor(&self, k: usize) -> Vector<S> {
        self.rs[k].sample.points.first().cloned().unwrap_or_else(|| Vector(vec![]))
    }

    fn sup_term(&self, k: usize, family: &[AbstractPoint<S>]) -> S {
        let r = &self.rs[k];
        let at = |psi: &Vector<S>| lq_of(family.iter().map(|pt| self.r_at(k, psi, pt)), r.exponent);
        if r.phi_independent {
            return at(&self.anchor(k));
        }
        let mut best = S::neg_infinity();
        for psi in &r.sample.points {
            let v = at(psi);
            if v > best {
                best = v;
            }
        }
        best
    }

    fn check_point(&self, pt: &AbstractPoint<S>) -> Result<()> {
        if pt.b.len() != self.rs.len() {
            return Err(Error::DimensionMismatch { expected: self.rs.len(), found: pt.b.len() });
        }
        Ok(())
    }

    /// Ratio of one family.
    pub fn ratio(&self, f: &F, family: &[AbstractPoint<S>]) -> Result<S> {
        let p0 = self.check_hypotheses()?;
        if family.is_empty() {
            return Err(Error::EmptySequence);
        }
        for pt in family {
            self.check_point(pt)?;
        }
        let lhs = lq_of(family.iter().map(|pt| (self.s)(f, &pt.x, &pt.b)), p0);
        let den = (0..self.rs.len()).map(|k| self.sup_term(k, family)).fold(S::one(), |a, b| a * b);
        if !(den > S::zero()) {
            return Err(Error::ZeroDenominator);
        }
        Ok(lhs / den)
    }

    fn coefficients(&self, f: &F, points: &[AbstractPoint<S>]) -> (Vec<S>, Vec<Vec<S>>) {
        let t = self.rs.len();
        let q = self.rs[t - 1].exponent;
        let anchors: Vec<Vector<S>> = (0..t - 1).map(|k| self.anchor(k)).collect();
        let mut a = Vec::with_capacity(points.len());
        let mut b = Vec::with_capacity(points.len());
        for pt in points {
            a.push(powq((self.s)(f, &pt.x, &pt.b), q));
            let r = (0..t - 1).fold(S::one(), |acc, k| acc * self.r_at(k, &anchors[k], pt));
            let rq = powq(r, q);
            b.push(self.rs[t - 1].sample.points.iter().map(|psi| rq * powq(self.r_at(t - 1, psi, pt), q)).collect());
        }
        (a, b)
    }

    /// Measure on the last sample dominating every point: `(constant, weights)`.
    pub fn fit(&self, f: &F, points: &[AbstractPoint<S>]) -> Result<(S, Vec<S>)> {
        self.check_hypotheses()?;
        for pt in points {
            self.check_point(pt)?;
        }
        let (a, b) = self.coefficients(f, points);
        let lp = domination_lp(&a, &b, self.rs[self.rs.len() - 1].exponent)?;
        Ok((lp.constant, lp.weights))
    }

    /// `sup` over probes of `S / (Π_{k<t} R_k · (Σ μ R_t^{p_t})^{1/p_t})`.
    pub fn validate(&self, f: &F, weights: &[S], probes: &[AbstractPoint<S>]) -> Result<S> {
        self.check_hypotheses()?;
        let t = self.rs.len();
        let q = self.rs[t - 1].exponent;
        let mut best = S::zero();
        for (idx, pt) in probes.iter().enumerate() {
            self.check_point(pt)?;
            let num = (self.s)(f, &pt.x, &pt.b);
            let r = (0..t - 1).fold(S::one(), |acc, k| acc * self.r_at(k, &self.anchor(k), pt));
            let m: S = self.rs[t - 1]
                .sample
                .points
                .iter()
                .zip(weights)
                .map(|(psi, &w)| w * powq(self.r_at(t - 1, psi, pt), q))
                .sum();
            let den = r * q.root(m);
            if den > S::zero() {
                best = best.max(num / den);
            } else if num > S::tol() {
                return Err(Error::DegenerateMeasure { witness: idx });
            }
        }
        Ok(best)
    }

    /// Random check that each `R_k` is homogeneous in its auxiliary vector
    /// and that `S` scales at least multiplicatively.
    pub fn check_homogeneity(&self, f: &F, points: &[AbstractPoint<S>], trials: usize, seed: u64) -> Result<()> {
        let t = self.rs.len();
        let mut rng = seeded(derive(seed, &[0x40]));
        for (idx, pt) in points.iter().enumerate() {
            self.check_point(pt)?;
            for _ in 0..trials {
                let lams: Vec<S> = (0..t).map(|_| S::of(rng.random_range(0.1..10.0))).collect();
                let scaled = AbstractPoint {
                    x: pt.x.clone(),
                    b: pt.b.iter().zip(&lams).map(|(v, l)| v.scaled(*l)).collect(),
                };
                for (k, lam) in lams.iter().enumerate() {
                    let psi = if self.rs[k].phi_independent {
                        self.anchor(k)
                    } else {
                        let n = self.rs[k].sample.len();
                        self.rs[k].sample.points[rng.random_range(0..n)].clone()
                    };
                    let mut one = pt.b.clone();
                    one[k] = pt.b[k].scaled(*lam);
                    let before = *lam * self.r_at(k, &psi, pt);
                    let after = (self.rs[k].eval)(&psi, &pt.x, &one[k]);
                    if (after - before).abs() > S::of(1e-9) * (S::one() + before.abs()) {
                        return Err(Error::HypothesisViolation(format!("R_{} is not homogeneous at point {idx}", k + 1)));
                    }
                }
                let prod = lams.iter().fold(S::one(), |a, b| a * *b);
                let base = (self.s)(f, &pt.x, &pt.b);
                let after = (self.s)(f, &scaled.x, &scaled.b);
                if after < prod * base - S::of(1e-9) * (S::one() + (prod * base).abs()) {
                    return Err(Error::HypothesisViolation(format!("S scales sub-multiplicatively at point {idx}")));
                }
            }
        }
        Ok(())
    }
}

/// Best ratio over `families`, the fitted measure on all their points, and
/// its validated constant over `probes` (when any are given).
pub fn abstract_bounds<S: Scalar, F: ?Sized>(
    prob: &AbstractProblem<'_, S, F>,
    f: &F,
    families: &[Vec<AbstractPoint<S>>],
    probes: &[AbstractPoint<S>],
) -> Result<AbstractBounds<S>> {
    prob.check_hypotheses()?;
    let mut lower = S::zero();
    let mut best_family = 0;
    for (i, fam) in families.iter().enumerate() {
        match prob.ratio(f, fam) {
            Ok(r) if r > lower => {
                lower = r;
                best_family = i;
            }
            Ok(_) | Err(Error::ZeroDenominator) => {}
            Err(e) => return Err(e),
        }
    }
    let points: Vec<AbstractPoint<S>> = families.iter().flatten().cloned().collect();
    let (lp_constant, weights) = prob.fit(f, &points)?;
    let upper = if probes.is_empty() { None } else { Some(prob.validate(f, &weights, probes)?) };
    Ok(AbstractBounds { lower, best_family, lp_constant, weights, upper })
}

/// The summing instantiation: `R_j = ‖x⁽ʲ⁾‖` for each slot with exponent
/// `qs[j]`, `R_t = |ψ(φ)|` with exponent `p*` on `atoms`, and
/// `S = |φ(T(x⁽¹⁾, …))|`.
pub fn canonical<'a, S: Scalar, T: Operator<S> + ?Sized>(
    domains: &[SpaceSpec],
    qs: &[Exponent],
    pstar: Exponent,
    atoms: BallSample<S>,
) -> AbstractProblem<'a, S, T> {
    let mut rs: Vec<RMap<'a, S>> = domains
        .iter()
        .zip(qs)
        .map(|(d, q)| {
            let d = *d;
            RMap {
                eval: Box::new(move |_: &Vector<S>, _: &[Vector<S>], b: &Vector<S>| d.norm_unchecked(b)) as REval<'a, S>,
                phi_independent: true,
                exponent: *q,
                sample: BallSample { space: d, points: vec![], kind: atoms.kind },
            }
        })
        .collect();
    rs.push(RMap {
        eval: Box::new(|psi: &Vector<S>, _: &[Vector<S>], phi: &Vector<S>| psi.dot(phi).abs()),
        phi_independent: false,
        exponent: pstar,
        sample: atoms,
    });
    let n = domains.len();
    AbstractProblem {
        rs,
        s: Box::new(move |op: &T, _: &[Vector<S>], b: &[Vector<S>]| {
            let refs: Vec<&Vector<S>> = b[..n].iter().collect();
            b[n].dot(&eval_unchecked(op, &refs)).abs()
        }),
    }
}

/// Points of a witness in the canonical layout `b = (x⁽¹⁾, …, x⁽ⁿ⁾, φ)`.
pub fn canonical_points<S: Scalar>(w: &SummingWitness<S>) -> Vec<AbstractPoint<S>> {
    (0..w.len())
        .map(|i| {
            let mut b: Vec<Vector<S>> = w.tuple(i).into_iter().cloned().collect();
            b.push(w.phis.items[i].clone());
            AbstractPoint { x: vec![], b }
        })
        .collect()
}
