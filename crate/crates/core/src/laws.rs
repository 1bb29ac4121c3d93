//! Law checks for Elgot algebras and seeded randomized suites.
//!
//! The checks are total predicates on concrete instances. The suites draw
//! random instances from a per-trial seed derived from one master seed, so
//! every reported counterexample can be replayed from its own seed.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, ElemId, ElgotAlgebra, FiniteCarrier, Solution};
use crate::system::{inl, inr, is_equation_morphism, pair, FlatRhs, FlatSystem, VarId};

pub mod random;

pub use random::Sample;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LawError {
    #[error("the given map is not a morphism of equations")]
    NotAMorphism,
    #[error("the map does not preserve solutions of single-layer systems")]
    HypothesisFailed,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Whether `s` makes the solution square commute for `e`: every operation
/// equation holds after applying `α`, every parameter equation holds as is.
/// Metric carriers are compared within one tolerance.
pub fn check_solution<A: ElgotAlgebra>(
    alg: &A,
    e: &FlatSystem<A::Elem>,
    s: &Solution<A::Elem>,
) -> Result<bool, AlgebraError> {
    for (x, rhs) in e.equations() {
        let Some(value) = s.get(x) else { return Ok(false) };
        let expected = match rhs {
            FlatRhs::Op { op, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    match s.get(a) {
                        Some(v) => vals.push(v.clone()),
                        None => return Ok(false),
                    }
                }
                alg.apply(op, &vals)?
            }
            FlatRhs::Param(p) => p.clone(),
        };
        if !alg.agree(value, &expected, 1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `e† = f† · h` for a morphism of equations `h: e → f`.
pub fn check_functoriality<A: ElgotAlgebra>(
    alg: &A,
    h: &HashMap<VarId, VarId>,
    e: &FlatSystem<A::Elem>,
    f: &FlatSystem<A::Elem>,
) -> Result<bool, LawError>
where
    A::Elem: PartialEq,
{
    if !is_equation_morphism(h, e, f) {
        return Err(LawError::NotAMorphism);
    }
    let se = alg.dagger(e)?;
    let sf = alg.dagger(f)?;
    Ok(e.vars().all(|x| alg.agree(&se[x], &sf[&h[x]], 2.0)))
}

/// Outcome of [`check_compositionality`]: the two equalities are reported
/// separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Compositionality {
    /// `(f† ▹ e)† = (f ⊞ e)† · inl`
    pub sequential: bool,
    /// `(f ⊞ e)† = [(f† ▹ e)†, f†]`
    pub simultaneous: bool,
}

impl Compositionality {
    pub fn holds(&self) -> bool {
        self.sequential && self.simultaneous
    }
}

/// Solving `f` first and substituting into `e` agrees with solving the
/// combined system `f ⊞ e` at once.
pub fn check_compositionality<A: ElgotAlgebra>(
    alg: &A,
    e: &FlatSystem<VarId>,
    f: &FlatSystem<A::Elem>,
) -> Result<Compositionality, LawError> {
    let f_sol = alg.dagger(f)?;
    let substituted = e.try_map_params(|y| {
        f_sol
            .get(y)
            .cloned()
            .ok_or_else(|| AlgebraError::System(crate::system::SystemError::ParamNotAVariable(y.clone())))
    })?;
    let seq = alg.dagger(&substituted)?;
    let joint = alg.dagger(&pair(f, e).map_err(AlgebraError::from)?)?;
    // each side is within one tolerance of its exact solution and the
    // substituted parameters add one more
    let slack = 3.0;
    let sequential = e.vars().all(|x| alg.agree(&seq[x], &joint[&inl(x)], slack));
    let simultaneous = sequential && f.vars().all(|y| alg.agree(&f_sol[y], &joint[&inr(y)], slack));
    Ok(Compositionality {
        sequential,
        simultaneous,
    })
}

/// `h · e†_A = (h ▹ e)†_B`.
pub fn check_solution_preserving<A, B>(
    h: impl Fn(&A::Elem) -> Result<B::Elem, AlgebraError>,
    alg_a: &A,
    alg_b: &B,
    e: &FlatSystem<A::Elem>,
) -> Result<bool, AlgebraError>
where
    A: ElgotAlgebra,
    B: ElgotAlgebra,
{
    let sa = alg_a.dagger(e)?;
    let sb = alg_b.dagger(&e.try_map_params(&h)?)?;
    for x in e.vars() {
        if !alg_b.agree(&h(&sa[x])?, &sb[x], 2.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `h(α_A(σ, ā)) = α_B(σ, h(ā))` for every operation and argument tuple.
pub fn is_homomorphism<A, B>(h: impl Fn(&A::Elem) -> B::Elem, alg_a: &A, alg_b: &B) -> Result<bool, AlgebraError>
where
    A: FiniteCarrier,
    B: ElgotAlgebra,
{
    let elems = alg_a.elements();
    for (op, arity) in alg_a.signature().ops() {
        for args in crate::algebra::tuples(elems.len(), arity) {
            let args: Vec<A::Elem> = args.iter().map(|i| elems[i.0].clone()).collect();
            let lhs = h(&alg_a.apply(op, &args)?);
            let mapped: Vec<B::Elem> = args.iter().map(&h).collect();
            if !alg_b.agree(&lhs, &alg_b.apply(op, &mapped)?, 2.0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Single-layer system `x = σ(y1..yn), yi = param ai`.
pub fn single_layer_system<P: Clone>(sig: &crate::system::Signature, op: &str, args: &[P]) -> FlatSystem<P> {
    let ys: Vec<VarId> = (0..args.len()).map(|i| VarId::new(format!("y{i}"))).collect();
    let mut eqs = vec![(VarId::new("x"), FlatRhs::op(op, ys.iter().cloned()))];
    eqs.extend(ys.into_iter().zip(args).map(|(y, a)| (y, FlatRhs::Param(a.clone()))));
    FlatSystem::new(sig.clone(), eqs).expect("single layer over the signature")
}

/// Checks that `h` preserves solutions of every single-layer system and, if
/// so, that it is a homomorphism of algebras.
pub fn homomorphism_from_solution_preserving<A, B>(
    h: impl Fn(&A::Elem) -> B::Elem,
    alg_a: &A,
    alg_b: &B,
) -> Result<bool, LawError>
where
    A: FiniteCarrier,
    B: ElgotAlgebra,
{
    let elems = alg_a.elements();
    for (op, arity) in alg_a.signature().ops() {
        for args in crate::algebra::tuples(elems.len(), arity) {
            let args: Vec<A::Elem> = args.iter().map(|i| elems[i.0].clone()).collect();
            let e = single_layer_system(alg_a.signature(), op, &args);
            if !check_solution_preserving(|a| Ok(h(a)), alg_a, alg_b, &e)? {
                return Err(LawError::HypothesisFailed);
            }
        }
    }
    Ok(is_homomorphism(h, alg_a, alg_b)?)
}

/// The system `H inr + A: HA + A → H(HA + A) + A` over a finite carrier.
///
/// Variables are named `σ(a1,...,an)` for the elements of `HA` and `a` for
/// those of `A`; its solution is `[α, id]`.
pub fn canonical_system<A: FiniteCarrier>(alg: &A, name: impl Fn(&A::Elem) -> String) -> FlatSystem<A::Elem> {
    let elems = alg.elements();
    let mut eqs = Vec::new();
    for (op, arity) in alg.signature().ops() {
        for args in crate::algebra::tuples(elems.len(), arity) {
            let names: Vec<String> = args.iter().map(|i| name(&elems[i.0])).collect();
            let var = VarId::new(format!("{op}({})", names.join(",")));
            eqs.push((var, FlatRhs::op(op, names.iter().map(|n| VarId::new(n.as_str())))));
        }
    }
    for a in &elems {
        eqs.push((VarId::new(name(a)), FlatRhs::Param(a.clone())));
    }
    FlatSystem::new(alg.signature().clone(), eqs).expect("canonical system is well formed")
}

/// Names used by the suites and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Solution,
    Functoriality,
    Compositionality,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Solution, Suite::Functoriality, Suite::Compositionality];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Solution => "solution",
            Suite::Functoriality => "functoriality",
            Suite::Compositionality => "compositionality",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub failures: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// SplitMix64 step; decorrelates per-trial seeds from the master seed.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trial` once per derived seed; `Ok(Some(_))` and `Err(_)` are both
/// recorded as counterexamples.
pub fn run_trials<T, E: fmt::Display>(trials: usize, seed: u64, mut trial: T) -> Vec<Counterexample>
where
    T: FnMut(&mut ChaCha8Rng) -> Result<Option<String>, E>,
{
    (0..trials)
        .filter_map(|i| {
            let s = trial_seed(seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            match trial(&mut rng) {
                Ok(None) => None,
                Ok(Some(detail)) => Some(Counterexample { seed: s, detail }),
                Err(err) => Some(Counterexample {
                    seed: s,
                    detail: format!("error: {err}"),
                }),
            }
        })
        .collect()
}

/// Upper bound on the number of variables in generated systems.
pub const MAX_VARS: usize = 8;

/// One random system, solved and checked against the solution square.
pub fn solution_trial<A: Sample>(alg: &A, rng: &mut ChaCha8Rng) -> Result<Option<String>, LawError> {
    let n = rng.gen_range(1..=MAX_VARS);
    let e = random::system(alg.signature(), n, "x", rng, |r| alg.sample(r));
    let s = alg.dagger(&e)?;
    Ok((!check_solution(alg, &e, &s)?).then(|| format!("square fails for {e:?}: solution {s:?}")))
}

/// A random system `f`, pulled back along a random surjection `h` to `e`.
pub fn functoriality_trial<A: Sample>(alg: &A, rng: &mut ChaCha8Rng) -> Result<Option<String>, LawError>
where
    A::Elem: PartialEq,
{
    let ny = rng.gen_range(1..=MAX_VARS / 2);
    let nx = rng.gen_range(ny..=MAX_VARS);
    let f = random::system(alg.signature(), ny, "y", rng, |r| alg.sample(r));
    let (h, e) = random::pull_back(&f, nx, rng);
    if check_functoriality(alg, &h, &e, &f)? {
        Ok(None)
    } else {
        Ok(Some(format!(
            "e = {e:?}, f = {f:?}, h = {h:?}: {:?} vs {:?}",
            alg.dagger(&e)?,
            alg.dagger(&f)?
        )))
    }
}

/// A random pair `e: X → HX + Y`, `f: Y → HY + A`.
pub fn compositionality_trial<A: Sample>(alg: &A, rng: &mut ChaCha8Rng) -> Result<Option<String>, LawError> {
    let ny = rng.gen_range(1..=MAX_VARS / 2);
    let nx = rng.gen_range(1..=MAX_VARS - ny);
    let f = random::system(alg.signature(), ny, "y", rng, |r| alg.sample(r));
    let ys: Vec<VarId> = f.vars().cloned().collect();
    let e = random::system(alg.signature(), nx, "x", rng, |r| {
        ys.choose(r).expect("non-empty").clone()
    });
    let outcome = check_compositionality(alg, &e, &f)?;
    if outcome.holds() {
        Ok(None)
    } else {
        Ok(Some(format!("e = {e:?}, f = {f:?}: {outcome:?}")))
    }
}

/// Runs one of the three suites against a fixed algebra.
pub fn run_suite<A: Sample>(alg: &A, suite: Suite, trials: usize, seed: u64) -> SuiteReport
where
    A::Elem: PartialEq,
{
    let failures = match suite {
        Suite::Solution => run_trials(trials, seed, |rng| solution_trial(alg, rng)),
        Suite::Functoriality => run_trials(trials, seed, |rng| functoriality_trial(alg, rng)),
        Suite::Compositionality => run_trials(trials, seed, |rng| compositionality_trial(alg, rng)),
    };
    SuiteReport {
        suite,
        seed,
        trials,
        failures,
    }
}

/// Element names for finite carriers in canonical systems: `#0`, `#1`, ...
pub fn elem_name(e: &ElemId) -> String {
    format!("#{}", e.0)
}
