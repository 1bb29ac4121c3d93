//! Seeded generators for signatures, systems, algebras and trees.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{
    AffineMap, BanachAlgebra, ElemId, ElgotAlgebra, ExtElem, ExtendedAlgebra, FiniteAlgebra, FreeRational, JoinAlgebra,
    KleeneAlgebra, UnaryAlgebra,
};
use crate::rational::RationalTree;
use crate::system::{FlatRhs, FlatSystem, Signature, VarId};

use super::{compositionality_trial, functoriality_trial, run_trials, solution_trial, Suite, SuiteReport};

/// Algebras that can draw random carrier elements.
pub trait Sample: ElgotAlgebra {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
}

fn pick_elem(size: usize, rng: &mut ChaCha8Rng) -> ElemId {
    ElemId(rng.gen_range(0..size))
}

impl Sample for UnaryAlgebra {
    fn sample(&self, rng: &mut ChaCha8Rng) -> ElemId {
        pick_elem(self.base().size(), rng)
    }
}

impl Sample for KleeneAlgebra {
    fn sample(&self, rng: &mut ChaCha8Rng) -> ElemId {
        pick_elem(self.base().size(), rng)
    }
}

impl Sample for JoinAlgebra {
    fn sample(&self, rng: &mut ChaCha8Rng) -> ElemId {
        pick_elem(self.base().size(), rng)
    }
}

impl Sample for BanachAlgebra {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.gen_range(0.0..=1.0)
    }
}

impl<A: Sample> Sample for ExtendedAlgebra<A> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> ExtElem<A::Elem> {
        let ops: Vec<(&str, usize)> = self.signature().ops().collect();
        if self.labels().is_empty() || (!ops.is_empty() && rng.gen_bool(0.5)) {
            let (op, arity) = *ops.choose(rng).expect("a signature or a label");
            ExtElem::Layer {
                op: op.to_owned(),
                args: (0..arity).map(|_| self.inner().sample(rng)).collect(),
            }
        } else {
            let i = rng.gen_range(0..self.labels().len());
            ExtElem::Label(self.labels().get_index(i).expect("in range").0.clone())
        }
    }
}

impl Sample for FreeRational {
    fn sample(&self, rng: &mut ChaCha8Rng) -> RationalTree<String> {
        tree(self.signature(), self.labels(), 4, rng)
    }
}

const OP_NAMES: [&str; 3] = ["f", "g", "h"];

/// One to three operations of arity zero to two.
pub fn signature(rng: &mut ChaCha8Rng) -> Signature {
    let n = rng.gen_range(1..=3);
    Signature::from_ops(OP_NAMES[..n].iter().map(|&op| (op, rng.gen_range(0..=2)))).expect("distinct names")
}

/// `n` variables `{prefix}0, ...`; each is a parameter with probability 1/3
/// (always, if the signature is empty) and otherwise an operation over
/// uniformly chosen variables.
pub fn system<P>(
    sig: &Signature,
    n: usize,
    prefix: &str,
    rng: &mut ChaCha8Rng,
    mut param: impl FnMut(&mut ChaCha8Rng) -> P,
) -> FlatSystem<P> {
    let vars: Vec<VarId> = (0..n).map(|i| VarId::new(format!("{prefix}{i}"))).collect();
    let ops: Vec<(&str, usize)> = sig.ops().collect();
    let eqs = vars
        .iter()
        .map(|x| {
            let rhs = if ops.is_empty() || rng.gen_ratio(1, 3) {
                FlatRhs::Param(param(rng))
            } else {
                let &(op, arity) = ops.choose(rng).expect("non-empty");
                FlatRhs::op(op, (0..arity).map(|_| vars.choose(rng).expect("n > 0").clone()))
            };
            (x.clone(), rhs)
        })
        .collect();
    FlatSystem::new(sig.clone(), eqs).expect("generated system is well formed")
}

/// A system `e` on `nx ≥ |f|` variables with a surjective morphism `h: e → f`.
pub fn pull_back<P: Clone>(
    f: &FlatSystem<P>,
    nx: usize,
    rng: &mut ChaCha8Rng,
) -> (HashMap<VarId, VarId>, FlatSystem<P>) {
    let ys: Vec<VarId> = f.vars().cloned().collect();
    assert!(nx >= ys.len() && !ys.is_empty());
    let mut images: Vec<VarId> = ys.clone();
    images.extend((ys.len()..nx).map(|_| ys.choose(rng).expect("non-empty").clone()));
    images.shuffle(rng);
    let xs: Vec<VarId> = (0..nx).map(|i| VarId::new(format!("x{i}"))).collect();
    let mut preimages: HashMap<&VarId, Vec<&VarId>> = HashMap::new();
    for (x, y) in xs.iter().zip(&images) {
        preimages.entry(y).or_default().push(x);
    }
    let eqs = xs
        .iter()
        .zip(&images)
        .map(|(x, y)| {
            let rhs = match f.rhs(y).expect("image is a variable of f") {
                FlatRhs::Op { op, args } => FlatRhs::op(
                    op.clone(),
                    args.iter()
                        .map(|a| (*preimages[a].choose(rng).expect("surjective")).clone()),
                ),
                FlatRhs::Param(p) => FlatRhs::Param(p.clone()),
            };
            (x.clone(), rhs)
        })
        .collect();
    let h = xs.iter().cloned().zip(images).collect();
    (
        h,
        FlatSystem::new(f.signature().clone(), eqs).expect("pulled back system is well formed"),
    )
}

/// A rational tree with at most `max_states` states over the given labels.
pub fn tree(sig: &Signature, labels: &[String], max_states: usize, rng: &mut ChaCha8Rng) -> RationalTree<String> {
    let n = rng.gen_range(1..=max_states);
    let e = system(sig, n, "t", rng, |r| {
        labels.choose(r).cloned().unwrap_or_else(|| "y".into())
    });
    RationalTree::new(&e, &VarId::new("t0")).expect("t0 is a state")
}

/// Element names `e0, e1, ...`.
fn carrier(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).collect()
}

/// A join semilattice of at most six subsets of `{0,1,2}` closed under
/// union, with every operation of `sig` interpreted as join.
pub fn join_algebra(sig: &Signature, rng: &mut ChaCha8Rng) -> JoinAlgebra {
    let mut family: Vec<u8> = vec![0];
    for _ in 0..rng.gen_range(1..=4) {
        let g: u8 = rng.gen_range(1..8);
        let mut next = family.clone();
        for &s in &family {
            next.push(s | g);
        }
        next.sort_unstable();
        next.dedup();
        if next.len() > 6 {
            break;
        }
        family = next;
    }
    let index: HashMap<u8, ElemId> = family.iter().enumerate().map(|(i, &s)| (s, ElemId(i))).collect();
    let mut joins = Vec::new();
    for (i, &a) in family.iter().enumerate() {
        for &b in &family[i + 1..] {
            joins.push((index[&a], index[&b], index[&(a | b)]));
        }
    }
    let base = FiniteAlgebra::new(carrier(family.len()))
        .and_then(|b| b.with_joins(&joins, ElemId(0)))
        .expect("union-closed family is a join semilattice");
    JoinAlgebra::new(base)
        .and_then(|j| j.extend_signature(sig))
        .expect("join tables are joins")
}

/// A bounded poset on two to five elements with random monotone tables.
/// Element `0` is least and the last element is greatest; order edges only
/// go from lower to higher index.
pub fn kleene_algebra(sig: &Signature, rng: &mut ChaCha8Rng) -> KleeneAlgebra {
    let n = rng.gen_range(2..=5);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if i == 0 || j == n - 1 || rng.gen_bool(0.3) {
                pairs.push((ElemId(i), ElemId(j)));
            }
        }
    }
    let mut base = FiniteAlgebra::new(carrier(n))
        .and_then(|b| b.with_order(&pairs, ElemId(0)))
        .expect("edges respect the index order");
    for (op, arity) in sig.ops() {
        let table = monotone_table(&base, arity, rng);
        base = base.with_entries(op, arity, &table).expect("table is total");
    }
    KleeneAlgebra::new(base).expect("tables are monotone")
}

/// Fills tuples in order of index sum, which extends the product order;
/// each value is chosen above the values of all smaller tuples.
fn monotone_table(base: &FiniteAlgebra, arity: usize, rng: &mut ChaCha8Rng) -> HashMap<Vec<ElemId>, ElemId> {
    let n = base.size();
    let leq = |a: ElemId, b: ElemId| base.leq(a, b).expect("ordered");
    let mut tuples: Vec<Vec<ElemId>> = crate::algebra::tuples(n, arity).collect();
    tuples.sort_by_key(|t| t.iter().map(|a| a.0).sum::<usize>());
    let mut table: HashMap<Vec<ElemId>, ElemId> = HashMap::new();
    for t in tuples {
        let lower: Vec<ElemId> = table
            .iter()
            .filter(|(s, _)| s.iter().zip(&t).all(|(&a, &b)| leq(a, b)))
            .map(|(_, &v)| v)
            .collect();
        let candidates: Vec<ElemId> = base.elements().filter(|&c| lower.iter().all(|&l| leq(l, c))).collect();
        let value = *candidates.choose(rng).expect("the top element is always a candidate");
        table.insert(t, value);
    }
    table
}

/// One to five elements, a random `s` with `s(e0) = e0` as the fixed point.
pub fn unary_algebra(rng: &mut ChaCha8Rng) -> UnaryAlgebra {
    let n = rng.gen_range(1..=5);
    let table: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { rng.gen_range(0..n) }).collect();
    let base = FiniteAlgebra::new(carrier(n))
        .and_then(|b| b.with_op("s", 1, |a| ElemId(table[a[0].0])))
        .expect("table is total");
    UnaryAlgebra::new(base, Some(ElemId(0))).expect("e0 is fixed")
}

/// Affine maps with coefficients in eighths, `Σ|cᵢ| ≤ 1/2`, mapping `[0,1]`
/// into itself; `ε = 1/2`, `τ = 1e-9`.
pub fn banach_algebra(sig: &Signature, rng: &mut ChaCha8Rng) -> BanachAlgebra {
    let ops = sig
        .ops()
        .map(|(op, arity)| {
            let mut budget: i64 = 4;
            let mut coeffs = Vec::with_capacity(arity);
            for _ in 0..arity {
                let c = rng.gen_range(-budget..=budget);
                budget -= c.abs();
                coeffs.push(c);
            }
            let neg: i64 = coeffs.iter().filter(|&&c| c < 0).sum();
            let pos: i64 = coeffs.iter().filter(|&&c| c > 0).sum();
            let constant = rng.gen_range(-neg..=8 - pos);
            let q = |k: i64| Ratio::new(k, 8);
            (
                op.to_owned(),
                AffineMap::new(q(constant), coeffs.into_iter().map(q).collect()),
            )
        })
        .collect();
    BanachAlgebra::new(ops, 0.5, 1e-9).expect("coefficients are contracting and in range")
}

/// Labels `y0, y1, y2` mapped to random elements of an inner Kleene algebra.
pub fn extended_algebra(sig: &Signature, rng: &mut ChaCha8Rng) -> ExtendedAlgebra<KleeneAlgebra> {
    let inner = kleene_algebra(sig, rng);
    let labels: IndexMap<String, ElemId> = (0..3).map(|i| (format!("y{i}"), inner.sample(rng))).collect();
    ExtendedAlgebra::new(inner, labels)
}

pub fn free_algebra(sig: &Signature) -> FreeRational {
    FreeRational::new(sig.clone(), vec!["y0".into(), "y1".into()])
}

/// The families of algebras the suites draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Unary,
    Kleene,
    Join,
    Banach,
    Extended,
    Free,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Unary,
        Variant::Kleene,
        Variant::Join,
        Variant::Banach,
        Variant::Extended,
        Variant::Free,
    ];

    pub fn parse(name: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.to_string() == name)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Unary => "unary",
            Variant::Kleene => "kleene",
            Variant::Join => "join",
            Variant::Banach => "banach",
            Variant::Extended => "extended",
            Variant::Free => "free",
        })
    }
}

fn trial_for<A: Sample>(alg: &A, suite: Suite, rng: &mut ChaCha8Rng) -> Result<Option<String>, super::LawError>
where
    A::Elem: PartialEq,
{
    match suite {
        Suite::Solution => solution_trial(alg, rng),
        Suite::Functoriality => functoriality_trial(alg, rng),
        Suite::Compositionality => compositionality_trial(alg, rng),
    }
}

/// Like [`super::run_suite`], but every trial draws a fresh algebra of the
/// given variant as well as fresh systems.
pub fn run_variant_suite(variant: Variant, suite: Suite, trials: usize, seed: u64) -> SuiteReport {
    let failures = run_trials(trials, seed, |rng| {
        let sig = signature(rng);
        match variant {
            Variant::Unary => trial_for(&unary_algebra(rng), suite, rng),
            Variant::Kleene => trial_for(&kleene_algebra(&sig, rng), suite, rng),
            Variant::Join => trial_for(&join_algebra(&sig, rng), suite, rng),
            Variant::Banach => trial_for(&banach_algebra(&sig, rng), suite, rng),
            Variant::Extended => trial_for(&extended_algebra(&sig, rng), suite, rng),
            Variant::Free => trial_for(&free_algebra(&sig), suite, rng),
        }
    });
    SuiteReport {
        suite,
        seed,
        trials,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::is_equation_morphism;
    use rand::SeedableRng;

    #[test]
    fn generators_produce_valid_instances() {
        for s in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let sig = signature(&mut rng);
            assert!(join_algebra(&sig, &mut rng).base().size() <= 6);
            kleene_algebra(&sig, &mut rng);
            unary_algebra(&mut rng);
            banach_algebra(&sig, &mut rng);
            let f = system(&sig, 3, "y", &mut rng, |r| r.gen_range(0..4u8));
            let (h, e) = pull_back(&f, 6, &mut rng);
            assert!(is_equation_morphism(&h, &e, &f));
        }
    }

    #[test]
    fn every_variant_passes_a_short_run() {
        for variant in Variant::ALL {
            for suite in Suite::ALL {
                let report = run_variant_suite(variant, suite, 30, 11);
                assert!(report.passed(), "{variant} {suite}: {:?}", report.failures.first());
            }
        }
    }
}
