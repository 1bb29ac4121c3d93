//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elgot::algebra::{
    build_stream_system, AffineMap, BanachAlgebra, ElemId, ElgotAlgebra, FiniteAlgebra, FiniteCarrier, JoinAlgebra,
    UnaryAlgebra,
};
use elgot::em::{check_em_laws, elgot_to_em, em_to_elgot};
use elgot::laws::random::{self, run_variant_suite, Variant};
use elgot::laws::{
    canonical_system, check_solution_preserving, elem_name, is_homomorphism, trial_seed, Suite, MAX_VARS,
};
use elgot::rational::{bisimilar, solve_free, unfold};
use elgot::system::{FlatRhs, FlatSystem, Signature};
use elgot::VarId;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, i))
}

fn suite_per_variant(suite: Suite, trials: usize) -> Outcome {
    let mut counts = Vec::new();
    for variant in Variant::ALL {
        let report = run_variant_suite(variant, suite, trials, 2024);
        if let Some(c) = report.failures.first() {
            return Err(format!(
                "{variant}: {} failures, first at seed {}: {}",
                report.failures.len(),
                c.seed,
                c.detail
            ));
        }
        counts.push(format!("{variant} {}/{}", trials - report.failures.len(), trials));
    }
    Ok(counts.join(", "))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let counts = suite_per_variant(Suite::Solution, 500)?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{counts} in {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    suite_per_variant(Suite::Functoriality, 500)
}

fn criterion_3() -> Outcome {
    suite_per_variant(Suite::Compositionality, 500)
}

fn criterion_4() -> Outcome {
    let mut max_steps = 0;
    for i in 0..1000 {
        let mut rng = rng(4, i);
        let alg = random::unary_algebra(&mut rng);
        let cpo = alg.flat_cpo().map_err(|e| e.to_string())?;
        let n = rng.gen_range(1..=MAX_VARS);
        let size = alg.base().size();
        let e = random::system(alg.signature(), n, "x", &mut rng, |r| ElemId(r.gen_range(0..size)));
        let closed = alg.dagger(&e).map_err(|e| e.to_string())?;
        let (least, steps) = cpo.least_solution(&e).map_err(|e| e.to_string())?;
        max_steps = max_steps.max(steps);
        ensure(closed == least, || {
            format!("trial {i}: {e:?}: closed form {closed:?}, Kleene {least:?}")
        })?;
    }
    Ok(format!(
        "1000/1000 systems agree (Kleene needed at most {max_steps} steps)"
    ))
}

fn criterion_5() -> Outcome {
    for i in 0..500 {
        let mut rng = rng(5, i);
        let sig = random::signature(&mut rng);
        let alg: JoinAlgebra = random::join_algebra(&sig, &mut rng);
        let size = alg.base().size();
        let n = rng.gen_range(1..=MAX_VARS);
        let e = random::system(&sig, n, "x", &mut rng, |r| ElemId(r.gen_range(0..size)));
        let join = alg.dagger(&e).map_err(|e| e.to_string())?;
        let kleene = alg.as_kleene().dagger(&e).map_err(|e| e.to_string())?;
        let trees = solve_free(&e);
        for x in e.vars() {
            let tree = trees[x].minimize();
            let leaves = tree
                .leaf_labels()
                .fold(alg.bottom(), |acc, &a| alg.base().join(acc, a).expect("joins"));
            ensure(join[x] == kleene[x] && kleene[x] == leaves, || {
                format!(
                    "trial {i}, {x}: join {:?}, Kleene {:?}, leaves {leaves:?}",
                    join[x], kleene[x]
                )
            })?;
        }
    }
    Ok("500/500 systems agree three ways".into())
}

fn criterion_6() -> Outcome {
    for i in 0..200 {
        let mut rng = rng(6, i);
        let sig = random::signature(&mut rng);
        let n = rng.gen_range(1..=MAX_VARS);
        let e = random::system(&sig, n, "x", &mut rng, |r| format!("y{}", r.gen_range(0..3)));
        let mut targets: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(targets.as_mut_slice(), &mut rng);
        let rename: HashMap<VarId, VarId> = e
            .vars()
            .zip(&targets)
            .map(|(x, k)| (x.clone(), VarId::new(format!("r{k}"))))
            .collect();
        let renamed = e.rename_vars(|x| rename[x].clone());
        let (s, t) = (solve_free(&e), solve_free(&renamed));
        for x in e.vars() {
            ensure(bisimilar(&s[x], &t[&rename[x]]), || {
                format!("trial {i}: {x} differs after renaming")
            })?;
        }
    }
    Ok("200/200 renamed systems have bisimilar solutions".into())
}

fn criterion_7() -> Outcome {
    let avg4 = AffineMap::parse("(x+y)/4").map_err(|e| e.to_string())?;
    let alg = BanachAlgebra::new(vec![("avg4".into(), avg4)], 0.5, 1e-9).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: (f64, usize) = (0.0, 0);
    for _ in 0..20 {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        for (cycle, expected) in [(vec![a], a / 3.0), (vec![a, b], (4.0 * a + b) / 15.0)] {
            let e = build_stream_system(alg.signature(), &[], &cycle, "avg4").map_err(|e| e.to_string())?;
            let (sol, steps) = alg.iterate(&e).map_err(|e| e.to_string())?;
            let err = (sol[&VarId::new("x0")] - expected).abs();
            ensure(err < 1e-9 && steps <= 40, || {
                format!("cycle {cycle:?}: error {err:e} after {steps} steps")
            })?;
            worst = (worst.0.max(err), worst.1.max(steps));
        }
    }
    Ok(format!(
        "40 streams, max error {:.1e}, max {} iterations",
        worst.0, worst.1
    ))
}

fn criterion_8() -> Outcome {
    let sig = Signature::from_ops([("mul", 2)]).expect("signature");
    let v = VarId::new;
    let comb = FlatSystem::new(
        sig.clone(),
        vec![
            (v("x"), FlatRhs::op("mul", [v("a"), v("y")])),
            (v("y"), FlatRhs::op("mul", [v("b"), v("z")])),
            (v("z"), FlatRhs::op("mul", [v("a2"), v("w")])),
            (v("w"), FlatRhs::op("mul", [v("b"), v("x")])),
            (v("a"), FlatRhs::Param("a".to_string())),
            (v("a2"), FlatRhs::Param("a".to_string())),
            (v("b"), FlatRhs::Param("b".to_string())),
        ],
    )
    .map_err(|e| e.to_string())?;
    let comb = elgot::RationalTree::new(&comb, &v("x")).map_err(|e| e.to_string())?;
    let states = comb.minimize().state_count();
    ensure(states == 4, || format!("comb minimizes to {states} states"))?;

    let labels = ["a".to_string(), "b".to_string()];
    let sig = Signature::from_ops([("mul", 2), ("neg", 1)]).expect("signature");
    let mut equal = 0;
    for i in 0..200 {
        let mut rng = rng(8, i);
        let s = random::tree(&sig, &labels, 4, &mut rng);
        let t = if rng.gen_bool(0.5) {
            let (_, e) = random::pull_back(s.system(), s.state_count() + rng.gen_range(0..3), &mut rng);
            let root = e.vars().find(|x| e.rhs(x) == s.system().rhs(s.root())).cloned();
            match root {
                Some(r) => elgot::RationalTree::new(&e, &r).map_err(|e| e.to_string())?,
                None => random::tree(&sig, &labels, 4, &mut rng),
            }
        } else {
            random::tree(&sig, &labels, 4, &mut rng)
        };
        let depth = s.state_count() * t.state_count();
        let by_unfold = unfold(&s, depth) == unfold(&t, depth);
        let by_bisim = bisimilar(&s, &t);
        equal += usize::from(by_bisim);
        ensure(by_unfold == by_bisim, || {
            format!("pair {i}: bisimilar {by_bisim}, unfoldings equal {by_unfold}")
        })?;
    }
    Ok(format!("comb has 4 states; 200/200 pairs agree ({equal} bisimilar)"))
}

fn diamond() -> JoinAlgebra {
    let [bot, a, b, top] = [0, 1, 2, 3].map(ElemId);
    let lattice = FiniteAlgebra::new(["bot", "a", "b", "top"])
        .and_then(|l| l.with_joins(&[(a, b, top), (a, top, top), (b, top, top)], bot))
        .expect("diamond");
    let sig = Signature::from_ops([("mul", 2)]).expect("signature");
    JoinAlgebra::new(lattice)
        .and_then(|j| j.extend_signature(&sig))
        .expect("join algebra")
}

fn criterion_9() -> Outcome {
    let alg = diamond();
    let names = alg.base().names().to_vec();
    let em = elgot_to_em(alg, move |x| names[x.0].clone()).map_err(|e| e.to_string())?;
    let [unit, mult] = check_em_laws(&em, 300, 9);
    ensure(unit.passed() && mult.passed(), || {
        format!("diamond: {:?} {:?}", unit.failures, mult.failures)
    })?;

    let mut extra = 0;
    for i in 0..5 {
        let mut rng = rng(9, i);
        let sig = random::signature(&mut rng);
        let kleene = random::kleene_algebra(&sig, &mut rng);
        let em = elgot_to_em(kleene, elem_name).map_err(|e| e.to_string())?;
        for report in check_em_laws(&em, 300, 9) {
            ensure(report.passed(), || {
                format!("random Kleene algebra {i}: {} law fails", report.law)
            })?;
        }
        let em = elgot_to_em(random::unary_algebra(&mut rng), elem_name).map_err(|e| e.to_string())?;
        for report in check_em_laws(&em, 300, 9) {
            ensure(report.passed(), || {
                format!("random unary algebra {i}: {} law fails", report.law)
            })?;
        }
        extra += 2;
    }

    let mutant = em
        .with_flipped_cell("mul", &[ElemId(1), ElemId(2)], ElemId(1))
        .map_err(|e| e.to_string())?;
    let [_, caught] = check_em_laws(&mutant, 300, 9);
    let first = caught.failures.first().ok_or("flipped cell not caught in 300 trials")?;
    Ok(format!(
        "diamond 300/300 (+{extra} random algebras); mutation caught {} times, first at seed {}",
        caught.failures.len(),
        first.seed
    ))
}

fn criterion_10() -> Outcome {
    let base = FiniteAlgebra::new(["0", "1"])
        .and_then(|b| b.with_op("s", 1, |a| a[0]))
        .map_err(|e| e.to_string())?;
    let alg = UnaryAlgebra::new(base, Some(ElemId(0))).map_err(|e| e.to_string())?;
    let const_one = |_: &ElemId| ElemId(1);
    let hom = is_homomorphism(const_one, &alg, &alg).map_err(|e| e.to_string())?;
    let e = FlatSystem::new(
        alg.signature().clone(),
        vec![(VarId::new("x"), FlatRhs::op("s", [VarId::new("x")]))],
    )
    .map_err(|e| e.to_string())?;
    let preserves = check_solution_preserving(|a| Ok(const_one(a)), &alg, &alg, &e).map_err(|e| e.to_string())?;
    ensure(hom && !preserves, || {
        format!("homomorphism {hom}, preserves solutions {preserves}")
    })?;
    Ok("const_1 is a homomorphism and does not preserve the solution of x = s(x)".into())
}

fn canonical_is_alpha_plus_id<A: FiniteCarrier<Elem = ElemId>>(alg: &A, label: &str) -> Result<(), String> {
    let e = canonical_system(alg, elem_name);
    let sol = alg.dagger(&e).map_err(|e| e.to_string())?;
    for (x, rhs) in e.equations() {
        let expected = match rhs {
            FlatRhs::Param(a) => *a,
            FlatRhs::Op { op, args } => {
                let args: Vec<ElemId> = args
                    .iter()
                    .map(|a| ElemId(a.as_str()[1..].parse().expect("#k")))
                    .collect();
                alg.apply(op, &args).map_err(|e| e.to_string())?
            }
        };
        ensure(sol[x] == expected, || {
            format!("{label}: {x} is {:?}, expected {expected:?}", sol[x])
        })?;
    }
    Ok(())
}

fn criterion_11() -> Outcome {
    let mut max_steps = 0;
    for i in 0..50 {
        let mut rng = rng(11, i);
        let sig = random::signature(&mut rng);
        let unary = random::unary_algebra(&mut rng);
        let kleene = random::kleene_algebra(&sig, &mut rng);
        let join = random::join_algebra(&sig, &mut rng);
        canonical_is_alpha_plus_id(&unary, "unary")?;
        canonical_is_alpha_plus_id(&kleene, "kleene")?;
        canonical_is_alpha_plus_id(&join, "join")?;
        let derived = em_to_elgot(elgot_to_em(kleene.clone(), elem_name).map_err(|e| e.to_string())?);
        canonical_is_alpha_plus_id(&derived, "em-derived")?;
        let (_, steps) = kleene
            .least_solution(&canonical_system(&kleene, elem_name))
            .map_err(|e| e.to_string())?;
        ensure(steps <= 2, || format!("Kleene took {steps} steps"))?;
        max_steps = max_steps.max(steps);
    }
    Ok(format!(
        "50 random instances of each finite variant; Kleene needed at most {max_steps} steps"
    ))
}

fn criterion_12() -> Outcome {
    let examples = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_elgot"))
            .args(["laws", "--algebra"])
            .arg(examples.join("lattice.alg"))
            .args(["--suite", "all", "--trials", "500", "--seed", "7", "--format", "json"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success() && b.status.success(), || "laws run failed".into())?;
    ensure(a.stdout == b.stdout, || "outputs differ".into())?;
    Ok(format!("two runs, {} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("solution square", criterion_1),
        ("functoriality", criterion_2),
        ("compositionality", criterion_3),
        ("unary closed form = flat cpo Kleene", criterion_4),
        ("join of leaves = Kleene = minimized leaves", criterion_5),
        ("unique solutions in R under renaming", criterion_6),
        ("Banach accuracy on avg4 streams", criterion_7),
        ("minimization and bisimilarity", criterion_8),
        ("monad-algebra laws", criterion_9),
        ("homomorphism that does not preserve solutions", criterion_10),
        ("canonical solution [alpha, id]", criterion_11),
        ("CLI determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
