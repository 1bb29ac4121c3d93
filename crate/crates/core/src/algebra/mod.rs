//! Elgot algebras: an algebra `α: HA → A` together with a chosen solution
//! `e†: X → A` for every flat system `e: X → HX + A`.
//!
//! Each concrete solution operator lives in its own submodule. They all
//! implement [`ElgotAlgebra`], which is what the law checks in
//! [`crate::laws`] and the passages in [`crate::em`] are written against.

use std::collections::HashMap;
use std::fmt;
use std::ops::Index;

use indexmap::IndexMap;
use thiserror::Error;

use crate::rational::TreeError;
use crate::system::{FlatSystem, Signature, SystemError, VarId};

mod banach;
mod extended;
mod free;
mod join;
mod kleene;
mod stream;
mod unary;

pub use banach::{AffineMap, BanachAlgebra};
pub use extended::{ExtElem, ExtendedAlgebra};
pub use free::FreeRational;
pub use join::JoinAlgebra;
pub use kleene::KleeneAlgebra;
pub use stream::build_stream_system;
pub use unary::UnaryAlgebra;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AlgebraError {
    #[error("system uses operations the algebra does not interpret")]
    SignatureMismatch,
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("`{op}` expects {expected} argument(s), found {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("variable `{0}` lies on a cycle and no fixed point is configured")]
    NoFixedPoint(VarId),
    #[error("stream cycle must be non-empty")]
    EmptyCycle,
    #[error("iteration did not converge within {0} steps")]
    NonConvergence(usize),
    #[error("unknown carrier element `{0}`")]
    UnknownElement(String),
    #[error("carrier element `{0}` is listed twice")]
    DuplicateElement(String),
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error("table for `{op}` has no entry for ({args})")]
    NonTotalTable { op: String, args: String },
    #[error("table for `{op}` has conflicting entries for ({args})")]
    ConflictingEntry { op: String, args: String },
    #[error("order is not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("`{0}` is not below every element")]
    BottomNotLeast(String),
    #[error("no bottom element given")]
    MissingBottom,
    #[error("join table: {0}")]
    JoinLaw(String),
    #[error("operation `{0}` is not monotone")]
    NotMonotone(String),
    #[error("a unary algebra has exactly one operation, of arity 1")]
    NotUnary,
    #[error("`{0}` is not a fixed point of the unary operation")]
    NotAFixedPoint(String),
    #[error("table for `{0}` is not the join of its arguments")]
    TableNotJoin(String),
    #[error("`{op}` has contraction factor {factor}, above the declared epsilon")]
    NotContracting { op: String, factor: f64 },
    #[error("`{0}` does not map [0,1] into [0,1]")]
    OutOfRange(String),
    #[error("epsilon must lie in [0,1), got {0}")]
    BadEpsilon(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("parameter {0} is outside [0,1]")]
    ParamOutOfRange(f64),
    #[error("no value assigned to label `{0}`")]
    UnknownLabel(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// A solution `e†: X → A`, total on the variables of its system.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<A> {
    assignment: IndexMap<VarId, A>,
}

impl<A> Solution<A> {
    pub fn from_assignment(assignment: IndexMap<VarId, A>) -> Self {
        Solution { assignment }
    }

    pub fn get(&self, x: &VarId) -> Option<&A> {
        self.assignment.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &A)> + '_ {
        self.assignment.iter()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn map<B>(&self, mut f: impl FnMut(&A) -> B) -> Solution<B> {
        Solution {
            assignment: self.assignment.iter().map(|(x, a)| (x.clone(), f(a))).collect(),
        }
    }
}

impl<A> Index<&VarId> for Solution<A> {
    type Output = A;

    fn index(&self, x: &VarId) -> &A {
        &self.assignment[x]
    }
}

impl<A> FromIterator<(VarId, A)> for Solution<A> {
    fn from_iter<I: IntoIterator<Item = (VarId, A)>>(iter: I) -> Self {
        Solution {
            assignment: iter.into_iter().collect(),
        }
    }
}

/// An `H_Σ`-algebra with a chosen solution for every flat system.
pub trait ElgotAlgebra {
    type Elem: Clone + fmt::Debug;

    fn signature(&self) -> &Signature;

    /// The algebra structure `α: HA → A`.
    fn apply(&self, op: &str, args: &[Self::Elem]) -> Result<Self::Elem, AlgebraError>;

    /// The chosen solution `e†`.
    fn dagger(&self, e: &FlatSystem<Self::Elem>) -> Result<Solution<Self::Elem>, AlgebraError>;

    /// Equality of carrier elements. Metric carriers accept a distance of up
    /// to `slack` times their tolerance; discrete carriers ignore `slack`.
    fn agree(&self, a: &Self::Elem, b: &Self::Elem, slack: f64) -> bool;
}

/// Algebras whose carrier can be listed.
pub trait FiniteCarrier: ElgotAlgebra {
    fn elements(&self) -> Vec<Self::Elem>;
}

pub(crate) fn ensure_signature<P>(alg: &Signature, e: &FlatSystem<P>) -> Result<(), AlgebraError> {
    if e.signature().is_subsignature_of(alg) {
        Ok(())
    } else {
        Err(AlgebraError::SignatureMismatch)
    }
}

/// Index of an element of a finite carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemId(pub usize);

/// Partial order with a least element, stored as a dense relation.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Order {
    leq: Vec<bool>,
    bottom: ElemId,
}

/// A finite carrier with total operation tables, optionally ordered and
/// optionally equipped with binary joins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    sig: Signature,
    carrier: Vec<String>,
    index: HashMap<String, ElemId>,
    tables: IndexMap<String, Vec<ElemId>>,
    order: Option<Order>,
    joins: Option<Vec<ElemId>>,
}

/// All tuples of length `arity` over `0..n`, first coordinate fastest.
pub(crate) fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<ElemId>> {
    let total = n.pow(arity as u32);
    (0..total).map(move |mut code| {
        (0..arity)
            .map(|_| {
                let d = code % n;
                code /= n;
                ElemId(d)
            })
            .collect()
    })
}

fn tuple_code(n: usize, args: &[ElemId]) -> usize {
    args.iter().rev().fold(0, |acc, a| acc * n + a.0)
}

impl FiniteAlgebra {
    pub fn new<S: Into<String>>(carrier: impl IntoIterator<Item = S>) -> Result<Self, AlgebraError> {
        let carrier: Vec<String> = carrier.into_iter().map(Into::into).collect();
        if carrier.is_empty() {
            return Err(AlgebraError::EmptyCarrier);
        }
        let mut index = HashMap::new();
        for (i, name) in carrier.iter().enumerate() {
            if index.insert(name.clone(), ElemId(i)).is_some() {
                return Err(AlgebraError::DuplicateElement(name.clone()));
            }
        }
        Ok(FiniteAlgebra {
            sig: Signature::new(),
            carrier,
            index,
            tables: IndexMap::new(),
            order: None,
            joins: None,
        })
    }

    /// Adds an operation whose table is computed by `f`.
    pub fn with_op(mut self, op: &str, arity: usize, f: impl Fn(&[ElemId]) -> ElemId) -> Result<Self, AlgebraError> {
        let n = self.size();
        let table: Vec<ElemId> = tuples(n, arity).map(|args| f(&args)).collect();
        if let Some(bad) = table.iter().find(|e| e.0 >= n) {
            return Err(AlgebraError::UnknownElement(format!("#{}", bad.0)));
        }
        self.sig.declare(op, arity)?;
        self.tables.insert(op.to_owned(), table);
        Ok(self)
    }

    /// Adds an operation from explicit entries, which must cover every tuple.
    pub fn with_entries(
        self,
        op: &str,
        arity: usize,
        entries: &HashMap<Vec<ElemId>, ElemId>,
    ) -> Result<Self, AlgebraError> {
        for args in tuples(self.size(), arity) {
            if !entries.contains_key(&args) {
                let args = self.render(&args);
                return Err(AlgebraError::NonTotalTable {
                    op: op.to_owned(),
                    args,
                });
            }
        }
        self.with_op(op, arity, |args| entries[args])
    }

    /// Adds the order generated by `pairs` (reflexive-transitive closure),
    /// which must be antisymmetric and have `bottom` as least element.
    pub fn with_order(mut self, pairs: &[(ElemId, ElemId)], bottom: ElemId) -> Result<Self, AlgebraError> {
        let n = self.size();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in pairs {
            leq[a.0 * n + b.0] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i * n + j] && leq[j * n + i] {
                    return Err(AlgebraError::NotPartialOrder(format!(
                        "{} and {} are below each other",
                        self.carrier[i], self.carrier[j]
                    )));
                }
            }
        }
        if (0..n).any(|j| !leq[bottom.0 * n + j]) {
            return Err(AlgebraError::BottomNotLeast(self.carrier[bottom.0].clone()));
        }
        self.order = Some(Order { leq, bottom });
        Ok(self)
    }

    /// Adds a binary join. Entries `a ∨ a = a`, `⊥ ∨ a = a` and the mirror of
    /// every given entry are filled in; the rest must be given. The join must
    /// be associative, commutative and idempotent with `bottom` as unit. If no
    /// order is present, the induced order `a ≤ b ⟺ a ∨ b = b` is installed.
    pub fn with_joins(mut self, entries: &[(ElemId, ElemId, ElemId)], bottom: ElemId) -> Result<Self, AlgebraError> {
        let n = self.size();
        let mut table: Vec<Option<ElemId>> = vec![None; n * n];
        let mut put = |a: ElemId, b: ElemId, c: ElemId, names: &[String]| -> Result<(), AlgebraError> {
            for (x, y) in [(a, b), (b, a)] {
                match table[x.0 * n + y.0] {
                    Some(old) if old != c => {
                        return Err(AlgebraError::JoinLaw(format!(
                            "{} ∨ {} is both {} and {}",
                            names[x.0], names[y.0], names[old.0], names[c.0]
                        )))
                    }
                    _ => table[x.0 * n + y.0] = Some(c),
                }
            }
            Ok(())
        };
        for &(a, b, c) in entries {
            put(a, b, c, &self.carrier)?;
        }
        for i in 0..n {
            put(ElemId(i), ElemId(i), ElemId(i), &self.carrier)?;
            put(bottom, ElemId(i), ElemId(i), &self.carrier)?;
        }
        let mut joins = Vec::with_capacity(n * n);
        for (k, entry) in table.iter().enumerate() {
            match entry {
                Some(c) => joins.push(*c),
                None => {
                    return Err(AlgebraError::JoinLaw(format!(
                        "missing {} ∨ {}",
                        self.carrier[k / n],
                        self.carrier[k % n]
                    )))
                }
            }
        }
        let j = |a: usize, b: usize| joins[a * n + b].0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if j(j(a, b), c) != j(a, j(b, c)) {
                        return Err(AlgebraError::JoinLaw(format!(
                            "not associative at {}, {}, {}",
                            self.carrier[a], self.carrier[b], self.carrier[c]
                        )));
                    }
                }
            }
        }
        let induced = |a: usize, b: usize| j(a, b) == b;
        match &self.order {
            Some(order) => {
                for a in 0..n {
                    for b in 0..n {
                        if order.leq[a * n + b] != induced(a, b) {
                            return Err(AlgebraError::JoinLaw(format!(
                                "join disagrees with the order at {}, {}",
                                self.carrier[a], self.carrier[b]
                            )));
                        }
                    }
                }
                if order.bottom != bottom {
                    return Err(AlgebraError::JoinLaw(
                        "join unit differs from the declared bottom".into(),
                    ));
                }
            }
            None => {
                let leq = (0..n * n).map(|k| induced(k / n, k % n)).collect();
                self.order = Some(Order { leq, bottom });
            }
        }
        self.joins = Some(joins);
        Ok(self)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.carrier.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = ElemId> {
        (0..self.size()).map(ElemId)
    }

    pub fn name(&self, e: ElemId) -> &str {
        &self.carrier[e.0]
    }

    pub fn names(&self) -> &[String] {
        &self.carrier
    }

    pub fn lookup(&self, name: &str) -> Result<ElemId, AlgebraError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| AlgebraError::UnknownElement(name.to_owned()))
    }

    /// Converts a system with named parameters into one over the carrier.
    pub fn resolve(&self, e: &FlatSystem<String>) -> Result<FlatSystem<ElemId>, AlgebraError> {
        e.try_map_params(|p| self.lookup(p))
    }

    pub fn render(&self, args: &[ElemId]) -> String {
        args.iter().map(|a| self.name(*a)).collect::<Vec<_>>().join(",")
    }

    pub fn eval(&self, op: &str, args: &[ElemId]) -> Result<ElemId, AlgebraError> {
        let table = self
            .tables
            .get(op)
            .ok_or_else(|| AlgebraError::UnknownOp(op.to_owned()))?;
        let arity = self.sig.arity(op).expect("table implies declaration");
        if arity != args.len() {
            return Err(AlgebraError::ArityMismatch {
                op: op.to_owned(),
                expected: arity,
                found: args.len(),
            });
        }
        if let Some(bad) = args.iter().find(|a| a.0 >= self.size()) {
            return Err(AlgebraError::UnknownElement(format!("#{}", bad.0)));
        }
        Ok(table[tuple_code(self.size(), args)])
    }

    /// Overwrites one table cell; used to build deliberately broken algebras.
    pub fn with_cell(mut self, op: &str, args: &[ElemId], value: ElemId) -> Result<Self, AlgebraError> {
        let n = self.size();
        let table = self
            .tables
            .get_mut(op)
            .ok_or_else(|| AlgebraError::UnknownOp(op.to_owned()))?;
        table[tuple_code(n, args)] = value;
        Ok(self)
    }

    pub fn is_ordered(&self) -> bool {
        self.order.is_some()
    }

    pub fn has_joins(&self) -> bool {
        self.joins.is_some()
    }

    pub fn leq(&self, a: ElemId, b: ElemId) -> Option<bool> {
        self.order.as_ref().map(|o| o.leq[a.0 * self.size() + b.0])
    }

    pub fn bottom(&self) -> Option<ElemId> {
        self.order.as_ref().map(|o| o.bottom)
    }

    pub fn join(&self, a: ElemId, b: ElemId) -> Option<ElemId> {
        self.joins.as_ref().map(|j| j[a.0 * self.size() + b.0])
    }

    pub(crate) fn table(&self, op: &str) -> &[ElemId] {
        &self.tables[op]
    }
}
