//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use summing_core::domination::{
    canonical, canonical_points, codomain_atoms, fit_certificate, refine, validate_certificate, RefineConfig,
};
use summing_core::experiments::{holder_factor_check, multi_equivalence, ExperimentConfig, Verdict};
use summing_core::operators::{random_linear, random_op, LinearOp, MultilinearOp};
use summing_core::seqnorms::{cohen_norm, grid_oracle, strong_norm, weak_norm, OracleKind, VecSequence, WeakMode};
use summing_core::spaces::Vector;
use summing_core::witness::{ratio, ExponentScheme, SearchConfig, SummingWitness};
use summing_core::{Exponent, SpaceSpec};

type Outcome = Result<String, String>;

fn e(q: f64) -> Exponent {
    Exponent::finite(q).unwrap()
}

fn space(rng: &mut ChaCha8Rng, dim: usize) -> SpaceSpec {
    let exps = [e(1.0), e(4.0 / 3.0), e(2.0), e(3.0), Exponent::Infinite];
    SpaceSpec::new(dim, exps[rng.random_range(0..exps.len())]).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vector<f64> {
    Vector((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
}

/// Seeded corpus for criteria 1 and 2.
fn corpus() -> Vec<(VecSequence<f64>, Exponent)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ps = [e(1.5), e(2.0), e(3.0)];
    (0..50)
        .map(|_| {
            let dim = rng.random_range(1..=3);
            let m = rng.random_range(1..=4);
            let sp = space(&mut rng, dim);
            let items = (0..m).map(|_| random_vec(&mut rng, dim)).collect();
            (VecSequence::new(sp, items).unwrap(), ps[rng.random_range(0..3)])
        })
        .collect()
}

fn oracle_res(dim: usize) -> usize {
    if dim <= 2 {
        summing_core::seqnorms::ORACLE_RES_2D
    } else {
        summing_core::seqnorms::ORACLE_RES_3D
    }
}

fn random_op_dims(seed: u64) -> LinearOp<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k) = (rng.random_range(1..=3), rng.random_range(1..=3));
    let (dom, cod) = (space(&mut rng, n), space(&mut rng, k));
    random_linear(dom, cod, seed)
}

fn refine_cfg() -> RefineConfig {
    RefineConfig { search: SearchConfig { budget: 4, seed: 0, m_max: 4 }, ..RefineConfig::default() }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_summing")
}

/// Runs the CLI; returns the exit code and the payload.
fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), v["payload"].clone())
}

fn op_file(dir: &Path, name: &str, t: &LinearOp<f64>) -> PathBuf {
    let sp = |s: &SpaceSpec| serde_json::json!({ "dim": s.dim, "exponent": s.exponent.to_string() });
    let body = serde_json::json!({
        "schema": "1", "kind": "linear", "label": name,
        "domains": [sp(&t.domain)], "codomain": sp(&t.codomain), "entries": t.matrix,
    });
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, body.to_string()).unwrap();
    path
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn norm_oracle_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut exact = 0;
    for (seq, p) in corpus() {
        let w = weak_norm(&seq, p, 8, 0).map_err(|e| e.to_string())?;
        exact += usize::from(!w.lower_bound_only);
        let o = grid_oracle(OracleKind::Weak, &seq, p, oracle_res(seq.space.dim)).map_err(|e| e.to_string())?;
        worst = worst.max((w.value - o.value).abs() / o.value.max(1e-300));
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 0.02 && secs < 60.0, format!("worst rel. diff {worst:.2e}, {exact}/50 exact paths, {secs:.1}s"))
}

fn chain_inequality() -> Outcome {
    let mut worst = f64::INFINITY;
    for (seq, p) in corpus() {
        let w = weak_norm(&seq, p, 8, 0).unwrap().value;
        let s = strong_norm(&seq, p).unwrap().value;
        let c = grid_oracle(OracleKind::Cohen, &seq, p, oracle_res(seq.space.dim)).unwrap().value;
        worst = worst.min((s - w).min(c - s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut law = 0.0f64;
    for _ in 0..20 {
        let dim = rng.random_range(1..=3);
        let sp = space(&mut rng, dim);
        let x = random_vec(&mut rng, dim);
        let m = rng.random_range(1..=4);
        let lam: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let p = [e(1.5), e(2.0), e(3.0)][rng.random_range(0..3)];
        let items = lam.iter().map(|a| Vector(x.0.iter().map(|c| a * c).collect())).collect();
        let seq = VecSequence::new(sp, items).unwrap();
        let expect = summing_core::spaces::lq_of(lam.iter().map(|a| a.abs()), p) * sp.norm(&x).unwrap();
        let c = cohen_norm(&seq, p, 8, 0).unwrap().value;
        law = law.max((c - expect).abs() / expect);
    }
    check(worst >= -1e-9 && law <= 0.02, format!("min slack {worst:.2e}, collinear law worst rel. {law:.2e}"))
}

fn bracket_validity() -> Outcome {
    let scheme = ExponentScheme::cohen(e(2.0)).unwrap();
    let (mut valid, mut closed) = (0, 0);
    let mut worst_gap = 0.0f64;
    for seed in 0..20 {
        let t = random_op_dims(100 + seed);
        let est = refine(&t, &scheme, &refine_cfg()).map_err(|e| e.to_string())?;
        let up = est.upper.unwrap();
        valid += usize::from(est.lower <= up + 1e-6);
        let gap = if up > 0.0 { (up - est.lower) / up } else { 0.0 };
        closed += usize::from(gap <= 0.10);
        worst_gap = worst_gap.max(gap);
    }
    check(valid == 20 && closed >= 16, format!("{valid}/20 valid, {closed}/20 within 10%, worst gap {worst_gap:.2e}"))
}

fn analytic_anchors() -> Outcome {
    let scheme = ExponentScheme::cohen(e(2.0)).unwrap();
    let within = |lo: f64, up: f64, v: f64| (lo - v).abs() <= 0.05 * v && (up - v).abs() <= 0.05 * v;
    let id = refine(&LinearOp::<f64>::identity(SpaceSpec::l2(2)), &scheme, &refine_cfg()).unwrap();
    let mut ok = within(id.lower, id.upper.unwrap(), SQRT_2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let (n, k) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let (dom, cod) = (space(&mut rng, n), space(&mut rng, k));
        let (f, y) = (random_vec(&mut rng, n), random_vec(&mut rng, k));
        let norm = dom.dual().norm(&f).unwrap() * cod.norm(&y).unwrap();
        let t = LinearOp::rank_one(dom, cod, &f, &y).unwrap();
        let est = refine(&t, &scheme, &refine_cfg()).unwrap();
        ok &= within(est.lower, est.upper.unwrap(), norm);
    }
    let z = refine(&LinearOp::<f64>::zero(SpaceSpec::l2(2), SpaceSpec::l1(3)), &scheme, &refine_cfg()).unwrap();
    ok &= z.lower == 0.0 && z.upper == Some(0.0);
    check(ok, format!("identity [{:.6}, {:.6}], 6 rank-one, zero [{}, {:?}]", id.lower, id.upper.unwrap(), z.lower, z.upper))
}

fn gamma_coincidence(dir: &Path) -> Outcome {
    let mut fails = Vec::new();
    for seed in 0..10 {
        let t = random_op_dims(200 + seed);
        let f = op_file(dir, &format!("op{seed}"), &t);
        let (code, p) = cli(&["verify-coincidence", "--p", "2", "--budget", "4", "--m-max", "4", f.to_str().unwrap()]);
        if code != 0 || p["result"]["verdict"] != "consistent" {
            fails.push(format!("op{seed}: exit {code}, verdict {}", p["result"]["verdict"]));
        }
    }
    check(fails.is_empty(), if fails.is_empty() { "10/10 consistent, exit 0".into() } else { fails.join("; ") })
}

fn multilinear_equivalence() -> Outcome {
    let p = e(2.0);
    let l2 = SpaceSpec::l2(2);
    let schemes = vec![
        ExponentScheme::joint(p).unwrap(),
        ExponentScheme::separate(p, 2).unwrap(),
        ExponentScheme::general(p, Exponent::ONE, vec![e(4.0), e(4.0)]).unwrap(),
    ];
    let cfg = ExperimentConfig { refine: refine_cfg(), tol: 0.05 };
    let mut consistent = 0;
    for seed in 0..5 {
        let b = random_op::<f64>(&[l2, l2], l2, 300 + seed).unwrap();
        let r = multi_equivalence(&b, p, &schemes, &cfg).map_err(|e| e.to_string())?;
        consistent += usize::from(r.verdict == Verdict::Consistent);
    }
    let form = MultilinearOp::<f64>::bilinear_form(l2, l2, &[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let est = refine(&form, &schemes[0], &refine_cfg()).unwrap();
    let up = est.upper.unwrap();
    let anchor = (est.lower - 1.0).abs() <= 0.05 && (up - 1.0).abs() <= 0.05;
    check(consistent == 5 && anchor, format!("{consistent}/5 consistent, rank-one anchor [{:.6}, {up:.6}]", est.lower))
}

fn holder_and_triviality(dir: &Path) -> Outcome {
    let r = holder_factor_check(e(2.0), e(4.0 / 3.0), e(4.0), 1000, 0).map_err(|e| e.to_string())?;
    let violations = r.metrics["violations"];
    let t = LinearOp::rank_one(SpaceSpec::l2(2), SpaceSpec::l2(2), &Vector(vec![1.0, 0.0]), &Vector(vec![0.0, 1.0])).unwrap();
    let f = op_file(dir, "rank_one", &t);
    let (code, p) = cli(&[
        "adjudicate-triviality", "--p", "2", "--q0", "4/3", "--q1", "4", "--schedule", "1,2,4,8,16", "--budget", "4",
        "--m-max", "4", f.to_str().unwrap(),
    ]);
    let bounded = p["result"]["metrics"]["bounded"].as_f64() == Some(1.0);
    check(
        violations == 0.0 && code == 0 && bounded,
        format!("holder violations {violations} (max ratio {:.12}), probe exit {code}, bounded {bounded}", r.metrics["max_ratio"]),
    )
}

fn engine_equivalence() -> Outcome {
    let scheme = ExponentScheme::cohen(e(2.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut same = 0;
    for seed in 0..10 {
        let t = random_op_dims(400 + seed);
        let atoms = codomain_atoms::<f64>(&t.codomain, 36);
        let m = rng.random_range(1..=4);
        let xs = VecSequence::new(t.domain, (0..m).map(|_| random_vec(&mut rng, t.domain.dim)).collect()).unwrap();
        let phis = VecSequence::new(t.codomain.dual(), (0..m).map(|_| random_vec(&mut rng, t.codomain.dim)).collect()).unwrap();
        let w = SummingWitness::linear(xs, phis).unwrap();
        let prob = canonical::<f64, LinearOp<f64>>(&[t.domain], &scheme.slot_exponents().unwrap(), scheme.pstar, atoms.clone());
        let pts = canonical_points(&w);
        let r = ratio(&t, &w, &scheme, WeakMode::Atoms(&atoms.points)).map_err(|e| e.to_string())?.value;
        let r2 = prob.ratio(&t, &pts).map_err(|e| e.to_string())?;
        let bits = match (fit_certificate(&t, &scheme, &atoms, std::slice::from_ref(&w)), prob.fit(&t, &pts)) {
            (Ok(c), Ok((k, wts))) => c.constant.to_bits() == k.to_bits() && c.weights == wts,
            (Err(_), Err(_)) => true,
            _ => false,
        };
        same += usize::from(bits && r.to_bits() == r2.to_bits());
    }
    let t = random_op_dims(450);
    let est = refine(&t, &scheme, &refine_cfg()).unwrap();
    let mut cert = est.certificate.unwrap();
    let a = validate_certificate(&t, &cert, 8, 0).unwrap().value;
    cert.scheme = ExponentScheme::linear(e(2.0), e(4.0 / 3.0), e(4.0)).unwrap();
    let b = validate_certificate(&t, &cert, 8, 0).unwrap().value;
    let diff = (a - b).abs();
    check(same == 10 && diff <= 1e-9, format!("{same}/10 bit-identical, scheme-swap diff {diff:.1e}"))
}

fn determinism(dir: &Path) -> Outcome {
    let t = random_op_dims(500);
    let f = op_file(dir, "det", &t);
    let f = f.to_str().unwrap();
    let runs: [&[&str]; 3] = [
        &["constant", "--p", "2", "--seed", "3", "--budget", "4", "--m-max", "4", f],
        &["verify-coincidence", "--p", "2", "--seed", "3", "--budget", "4", "--m-max", "4", f],
        &["holder-check", "--p", "2", "--q0", "4/3", "--q1", "4", "--trials", "200", "--seed", "3"],
    ];
    let mut same = 0;
    for args in runs {
        let (a, b) = (cli(args).1, cli(args).1);
        same += usize::from(!a.is_null() && a.to_string() == b.to_string());
    }
    check(same == 3, format!("{same}/3 commands byte-identical"))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 norm oracle agreement", Box::new(norm_oracle_agreement)),
        ("2 chain inequality", Box::new(chain_inequality)),
        ("3 bracket validity", Box::new(bracket_validity)),
        ("4 analytic anchors", Box::new(analytic_anchors)),
        ("5 gamma coincidence", Box::new(|| gamma_coincidence(dir.path()))),
        ("6 multilinear equivalence", Box::new(multilinear_equivalence)),
        ("7 hoelder and triviality probe", Box::new(|| holder_and_triviality(dir.path()))),
        ("8 abstract engine equivalence", Box::new(engine_equivalence)),
        ("9 determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS criterion {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d} ({secs:.1}s)")
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
