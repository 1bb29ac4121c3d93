//! Passages between Elgot algebras and algebras for the rational-tree monad.
//!
//! An [`EmAlgebra`] evaluates every rational tree over its carrier to a
//! carrier element. [`elgot_to_em`] evaluates a tree by solving its defining
//! system; [`em_to_elgot`] recovers operations and solutions from the
//! evaluation. [`check_em_laws`] tests the unit and multiplication laws on
//! random nested trees.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{ensure_signature, AlgebraError, ElgotAlgebra, FiniteCarrier, Solution};
use crate::laws::{random, trial_seed, Sample};
use crate::rational::{apply_layer, eta, solve_free, substitute, unfold, RationalTree};
use crate::system::{FlatRhs, FlatSystem, Signature, VarId};

type Evaluate<E> = Arc<dyn Fn(&RationalTree<E>) -> Result<E, AlgebraError> + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EmError {
    #[error("unit law fails at `{0}`")]
    UnitLaw(String),
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A finite carrier with an evaluation `RA → A`.
#[derive(Clone)]
pub struct EmAlgebra<E> {
    sig: Signature,
    carrier: Vec<E>,
    names: Vec<String>,
    evaluate: Evaluate<E>,
}

impl<E> fmt::Debug for EmAlgebra<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmAlgebra")
            .field("sig", &self.sig)
            .field("carrier", &self.names)
            .finish_non_exhaustive()
    }
}

impl<E: Clone + fmt::Debug + Ord + Send + Sync + 'static> EmAlgebra<E> {
    /// `names[i]` renders `carrier[i]`. The unit law is checked here.
    pub fn new(
        sig: Signature,
        carrier: Vec<E>,
        names: Vec<String>,
        evaluate: impl Fn(&RationalTree<E>) -> Result<E, AlgebraError> + Send + Sync + 'static,
    ) -> Result<Self, EmError> {
        if carrier.is_empty() {
            return Err(EmError::EmptyCarrier);
        }
        assert_eq!(carrier.len(), names.len(), "one name per element");
        let em = EmAlgebra {
            sig,
            carrier,
            names,
            evaluate: Arc::new(evaluate),
        };
        for (a, name) in em.carrier.iter().zip(&em.names) {
            if em.evaluate(&eta(&em.sig, a.clone()))? != *a {
                return Err(EmError::UnitLaw(name.clone()));
            }
        }
        Ok(em)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn carrier(&self) -> &[E] {
        &self.carrier
    }

    pub fn evaluate(&self, t: &RationalTree<E>) -> Result<E, AlgebraError> {
        (self.evaluate)(t)
    }

    pub fn name(&self, a: &E) -> String {
        self.carrier
            .iter()
            .position(|b| b == a)
            .map_or_else(|| format!("{a:?}"), |i| self.names[i].clone())
    }

    /// The same evaluation after rewriting every subtree `op(a1,...,an)` with
    /// leaf arguments to the leaf `value`, as if that table cell were flipped.
    pub fn with_flipped_cell(&self, op: &str, args: &[E], value: E) -> Result<Self, AlgebraError> {
        let leaves: Vec<RationalTree<E>> = args.iter().map(|a| eta(&self.sig, a.clone())).collect();
        apply_layer(&self.sig, op, &leaves)?;
        let (op, args) = (op.to_string(), args.to_vec());
        let original = Arc::clone(&self.evaluate);
        Ok(EmAlgebra {
            evaluate: Arc::new(move |t| original(&rewrite_cell(t, &op, &args, &value)?)),
            ..self.clone()
        })
    }

    fn render(&self, t: &RationalTree<E>) -> String {
        unfold(&t.map_labels(|a| self.name(a)), 4).to_string()
    }
}

fn rewrite_cell<E: Clone + PartialEq>(
    t: &RationalTree<E>,
    op: &str,
    args: &[E],
    value: &E,
) -> Result<RationalTree<E>, AlgebraError> {
    let sys = t.system();
    let is_leaf = |x: &VarId, a: &E| matches!(sys.rhs(x), Some(FlatRhs::Param(b)) if b == a);
    let equations = sys
        .equations()
        .map(|(x, rhs)| {
            let rhs = match rhs {
                FlatRhs::Op { op: o, args: xs }
                    if o.as_str() == op
                        && xs.len() == args.len()
                        && xs.iter().zip(args).all(|(x, a)| is_leaf(x, a)) =>
                {
                    FlatRhs::Param(value.clone())
                }
                other => other.clone(),
            };
            (x.clone(), rhs)
        })
        .collect();
    let sys = FlatSystem::new(sys.signature().clone(), equations)?;
    Ok(RationalTree::new(&sys, t.root()).expect("root is kept"))
}

/// Evaluates a tree by solving its defining system in `alg` at the root.
pub fn elgot_to_em<A>(alg: A, name: impl Fn(&A::Elem) -> String) -> Result<EmAlgebra<A::Elem>, EmError>
where
    A: FiniteCarrier + Send + Sync + 'static,
    A::Elem: Ord + Send + Sync + 'static,
{
    let sig = alg.signature().clone();
    let carrier = alg.elements();
    let names = carrier.iter().map(name).collect();
    EmAlgebra::new(sig, carrier, names, move |t| {
        Ok(alg.dagger(t.system())?[t.root()].clone())
    })
}

/// The Elgot algebra underlying an [`EmAlgebra`]:
/// `α(σ, ā) = evaluate(σ(η ā))` and `e†(x) = evaluate(tree of x in e)`.
#[derive(Clone, Debug)]
pub struct EmDerived<E> {
    em: EmAlgebra<E>,
}

pub fn em_to_elgot<E>(em: EmAlgebra<E>) -> EmDerived<E> {
    EmDerived { em }
}

impl<E> EmDerived<E> {
    pub fn em(&self) -> &EmAlgebra<E> {
        &self.em
    }
}

impl<E: Clone + fmt::Debug + Ord + Send + Sync + 'static> ElgotAlgebra for EmDerived<E> {
    type Elem = E;

    fn signature(&self) -> &Signature {
        &self.em.sig
    }

    fn apply(&self, op: &str, args: &[E]) -> Result<E, AlgebraError> {
        let leaves: Vec<RationalTree<E>> = args.iter().map(|a| eta(&self.em.sig, a.clone())).collect();
        self.em.evaluate(&apply_layer(&self.em.sig, op, &leaves)?)
    }

    fn dagger(&self, e: &FlatSystem<E>) -> Result<Solution<E>, AlgebraError> {
        ensure_signature(&self.em.sig, e)?;
        let e = e.clone().with_signature(self.em.sig.clone())?;
        solve_free(&e)
            .into_iter()
            .map(|(x, t)| Ok((x, self.em.evaluate(&t)?)))
            .collect()
    }

    fn agree(&self, a: &E, b: &E, _slack: f64) -> bool {
        a == b
    }
}

impl<E: Clone + fmt::Debug + Ord + Send + Sync + 'static> FiniteCarrier for EmDerived<E> {
    fn elements(&self) -> Vec<E> {
        self.em.carrier.clone()
    }
}

impl<E: Clone + fmt::Debug + Ord + Send + Sync + 'static> Sample for EmDerived<E> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> E {
        self.em.carrier.choose(rng).expect("non-empty carrier").clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmLaw {
    Unit,
    Multiplication,
}

impl fmt::Display for EmLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmLaw::Unit => "unit",
            EmLaw::Multiplication => "multiplication",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmCounterexample {
    pub seed: u64,
    pub tree: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmLawReport {
    pub law: EmLaw,
    pub trials: usize,
    pub failures: Vec<EmCounterexample>,
}

impl EmLawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Maximum depth of generated outer trees.
pub const OUTER_DEPTH: usize = 3;
/// Maximum state count of generated inner trees.
pub const INNER_STATES: usize = 5;

/// A tree of depth at most [`OUTER_DEPTH`] whose leaves carry random inner
/// trees; an operation node occasionally points back to an ancestor.
pub fn nested_tree<E: Clone>(sig: &Signature, carrier: &[E], rng: &mut ChaCha8Rng) -> RationalTree<RationalTree<E>> {
    fn grow<E: Clone>(
        sig: &Signature,
        ops: &[(&str, usize)],
        carrier: &[E],
        depth: usize,
        ancestors: &mut Vec<VarId>,
        eqs: &mut Vec<(VarId, FlatRhs<RationalTree<E>>)>,
        rng: &mut ChaCha8Rng,
    ) -> VarId {
        let x = VarId::new(format!("n{}", eqs.len()));
        let slot = eqs.len();
        eqs.push((x.clone(), FlatRhs::Param(eta(sig, carrier[0].clone()))));
        let rhs = if depth == OUTER_DEPTH || ops.is_empty() || (depth > 0 && rng.gen_bool(0.5)) {
            FlatRhs::Param(inner_tree(sig, carrier, rng))
        } else {
            let &(op, arity) = ops.choose(rng).expect("non-empty");
            ancestors.push(x.clone());
            let args: Vec<VarId> = (0..arity)
                .map(|_| {
                    if rng.gen_ratio(1, 10) {
                        ancestors.choose(rng).expect("self is an ancestor").clone()
                    } else {
                        grow(sig, ops, carrier, depth + 1, ancestors, eqs, rng)
                    }
                })
                .collect();
            ancestors.pop();
            FlatRhs::op(op, args)
        };
        eqs[slot].1 = rhs;
        x
    }
    let ops: Vec<(&str, usize)> = sig.ops().collect();
    let mut eqs = Vec::new();
    let root = grow(sig, &ops, carrier, 0, &mut Vec::new(), &mut eqs, rng);
    let sys = FlatSystem::new(sig.clone(), eqs).expect("generated tree is well formed");
    RationalTree::new(&sys, &root).expect("root is a state")
}

/// A random tree over at most two carrier elements with at least one leaf.
fn inner_tree<E: Clone>(sig: &Signature, carrier: &[E], rng: &mut ChaCha8Rng) -> RationalTree<E> {
    let palette: Vec<E> = carrier.choose_multiple(rng, 2).cloned().collect();
    loop {
        let n = rng.gen_range(1..=INNER_STATES);
        let e = random::system(sig, n, "t", rng, |r| palette.choose(r).expect("non-empty").clone());
        let t = RationalTree::new(&e, &VarId::new("t0")).expect("t0 is a state");
        if t.leaf_labels().next().is_some() {
            return t;
        }
    }
}

/// Unit law on every element, multiplication law on `trials` random nested
/// trees. Evaluation errors count as failures.
pub fn check_em_laws<E>(em: &EmAlgebra<E>, trials: usize, seed: u64) -> [EmLawReport; 2]
where
    E: Clone + fmt::Debug + Ord + Send + Sync + 'static,
{
    let show = |r: Result<E, AlgebraError>| match r {
        Ok(a) => em.name(&a),
        Err(err) => format!("error: {err}"),
    };
    let unit_failures = em
        .carrier
        .iter()
        .filter_map(|a| {
            let leaf = eta(&em.sig, a.clone());
            let value = em.evaluate(&leaf);
            (value.as_ref() != Ok(a)).then(|| EmCounterexample {
                seed,
                tree: em.render(&leaf),
                lhs: show(value),
                rhs: em.name(a),
            })
        })
        .collect();
    let unit = EmLawReport {
        law: EmLaw::Unit,
        trials: em.carrier.len(),
        failures: unit_failures,
    };

    let failures = (0..trials)
        .filter_map(|i| {
            let seed = trial_seed(seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = nested_tree(&em.sig, &em.carrier, &mut rng);
            let lhs = substitute(&t)
                .map_err(AlgebraError::from)
                .and_then(|flat| em.evaluate(&flat));
            let rhs = t
                .try_map_labels(|inner| em.evaluate(inner))
                .and_then(|outer| em.evaluate(&outer));
            (lhs != rhs).then(|| EmCounterexample {
                seed,
                tree: unfold(&t.map_labels(|inner| em.render(inner)), OUTER_DEPTH + 1).to_string(),
                lhs: show(lhs),
                rhs: show(rhs),
            })
        })
        .collect();
    let multiplication = EmLawReport {
        law: EmLaw::Multiplication,
        trials,
        failures,
    };
    [unit, multiplication]
}
