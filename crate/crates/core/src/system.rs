//! Signatures and flat equation systems.
//!
//! A flat system assigns to every recursion variable either one operation
//! symbol applied to variables, or a parameter. It is the finite coalgebra
//! `e: X → H_Σ X + P` of the polynomial functor induced by a [`Signature`].

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Tag prepended to the left summand `X` of a pairing `X ⊎ Y`.
pub const LEFT_TAG: &str = "L.";
/// Tag prepended to the right summand `Y` of a pairing `X ⊎ Y`.
pub const RIGHT_TAG: &str = "R.";
/// Reserved prefix of auxiliary variables created by [`flatten`].
pub const FRESH_PREFIX: &str = "$";

/// Name of a recursion variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(String);

impl VarId {
    pub fn new(name: impl Into<String>) -> Self {
        VarId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn tagged(&self, tag: &str) -> VarId {
        VarId(format!("{tag}{}", self.0))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarId {
    fn from(s: &str) -> Self {
        VarId(s.to_owned())
    }
}

/// The left coproduct injection `inl: X → X ⊎ Y` as realised by tagging.
pub fn inl(x: &VarId) -> VarId {
    x.tagged(LEFT_TAG)
}

/// The right coproduct injection `inr: Y → X ⊎ Y` as realised by tagging.
pub fn inr(y: &VarId) -> VarId {
    y.tagged(RIGHT_TAG)
}

/// A finite set of operation symbols with arities, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    ops: IndexMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a signature from `(symbol, arity)` pairs, rejecting duplicates.
    pub fn from_ops<S: Into<String>>(ops: impl IntoIterator<Item = (S, usize)>) -> Result<Self, SystemError> {
        let mut sig = Signature::new();
        for (op, arity) in ops {
            sig.declare(op, arity)?;
        }
        Ok(sig)
    }

    pub fn declare(&mut self, op: impl Into<String>, arity: usize) -> Result<(), SystemError> {
        let op = op.into();
        if self.ops.contains_key(&op) {
            return Err(SystemError::DuplicateOp(op));
        }
        self.ops.insert(op, arity);
        Ok(())
    }

    pub fn arity(&self, op: &str) -> Option<usize> {
        self.ops.get(op).copied()
    }

    pub fn ops(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.ops.iter().map(|(op, &n)| (op.as_str(), n))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// True when every symbol of `self` occurs in `other` with the same arity.
    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        self.ops().all(|(op, n)| other.arity(op) == Some(n))
    }

    /// Union of two signatures; fails on conflicting arities.
    pub fn merge(&self, other: &Signature) -> Result<Signature, SystemError> {
        let mut out = self.clone();
        for (op, n) in other.ops() {
            match out.arity(op) {
                Some(m) if m != n => {
                    return Err(SystemError::ConflictingArity {
                        op: op.to_owned(),
                        left: m,
                        right: n,
                    })
                }
                Some(_) => {}
                None => {
                    out.ops.insert(op.to_owned(), n);
                }
            }
        }
        Ok(out)
    }
}

/// Right-hand side of one flat equation: `inl` into `H_Σ X` or `inr` into `P`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FlatRhs<P> {
    Op { op: String, args: Vec<VarId> },
    Param(P),
}

impl<P> FlatRhs<P> {
    pub fn op(op: impl Into<String>, args: impl IntoIterator<Item = VarId>) -> Self {
        FlatRhs::Op {
            op: op.into(),
            args: args.into_iter().collect(),
        }
    }

    pub fn map_param<Q>(&self, f: impl FnOnce(&P) -> Q) -> FlatRhs<Q> {
        match self {
            FlatRhs::Op { op, args } => FlatRhs::Op {
                op: op.clone(),
                args: args.clone(),
            },
            FlatRhs::Param(p) => FlatRhs::Param(f(p)),
        }
    }

    pub fn map_vars(&self, f: impl FnMut(&VarId) -> VarId) -> FlatRhs<P>
    where
        P: Clone,
    {
        match self {
            FlatRhs::Op { op, args } => FlatRhs::Op {
                op: op.clone(),
                args: args.iter().map(f).collect(),
            },
            FlatRhs::Param(p) => FlatRhs::Param(p.clone()),
        }
    }
}

/// One problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Diagnostic {
    #[error("variable `{var}` is declared more than once")]
    DuplicateVar { var: VarId },
    #[error("variable name must be non-empty")]
    EmptyVar,
    #[error("in equation for `{at}`: unknown variable `{var}`")]
    UnknownVar { at: VarId, var: VarId },
    #[error("in equation for `{at}`: unknown operation `{op}`")]
    UnknownOp { at: VarId, op: String },
    #[error("in equation for `{at}`: `{op}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        at: VarId,
        op: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("invalid system: {}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("operation `{0}` is declared more than once")]
    DuplicateOp(String),
    #[error("operation `{op}` has arity {left} on one side and {right} on the other")]
    ConflictingArity { op: String, left: usize, right: usize },
    #[error("no image given for parameter `{0}`")]
    MissingParamImage(String),
    #[error("parameter `{0}` is not a variable of the system it should refer to")]
    ParamNotAVariable(VarId),
    #[error("the two systems are over different signatures")]
    SignatureMismatch,
    #[error("equation for `{0}` is a bare variable; it has no flat form")]
    UnguardedVariable(VarId),
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Checks the well-formedness invariants of a list of equations.
///
/// Returns every problem found, not just the first.
pub fn validate<P>(sig: &Signature, equations: &[(VarId, FlatRhs<P>)]) -> Result<(), Vec<Diagnostic>> {
    let mut diagnostics = Vec::new();
    let mut declared = HashSet::new();
    for (var, _) in equations {
        if var.as_str().is_empty() {
            diagnostics.push(Diagnostic::EmptyVar);
        }
        if !declared.insert(var) {
            diagnostics.push(Diagnostic::DuplicateVar { var: var.clone() });
        }
    }
    for (at, rhs) in equations {
        let FlatRhs::Op { op, args } = rhs else { continue };
        match sig.arity(op) {
            None => diagnostics.push(Diagnostic::UnknownOp {
                at: at.clone(),
                op: op.clone(),
            }),
            Some(n) if n != args.len() => diagnostics.push(Diagnostic::ArityMismatch {
                at: at.clone(),
                op: op.clone(),
                expected: n,
                found: args.len(),
            }),
            Some(_) => {}
        }
        for arg in args {
            if !declared.contains(arg) {
                diagnostics.push(Diagnostic::UnknownVar {
                    at: at.clone(),
                    var: arg.clone(),
                });
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(diagnostics)
    }
}

/// A validated flat equation system `e: X → H_Σ X + P`.
///
/// Variables keep their declaration order, which is also the order used when
/// the system is printed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSystem<P> {
    sig: Signature,
    eqs: IndexMap<VarId, FlatRhs<P>>,
}

/// Index-based view of one equation, for solvers.
#[derive(Clone, Copy, Debug)]
pub enum Step<'a, P> {
    Op(&'a str, &'a [usize]),
    Param(&'a P),
}

impl<P> FlatSystem<P> {
    pub fn new(sig: Signature, equations: Vec<(VarId, FlatRhs<P>)>) -> Result<Self, SystemError> {
        validate(&sig, &equations).map_err(SystemError::Invalid)?;
        Ok(FlatSystem {
            sig,
            eqs: equations.into_iter().collect(),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    pub fn vars(&self) -> impl ExactSizeIterator<Item = &VarId> + '_ {
        self.eqs.keys()
    }

    pub fn equations(&self) -> impl ExactSizeIterator<Item = (&VarId, &FlatRhs<P>)> + '_ {
        self.eqs.iter()
    }

    pub fn rhs(&self, var: &VarId) -> Option<&FlatRhs<P>> {
        self.eqs.get(var)
    }

    pub fn contains(&self, var: &VarId) -> bool {
        self.eqs.contains_key(var)
    }

    pub fn index_of(&self, var: &VarId) -> Option<usize> {
        self.eqs.get_index_of(var)
    }

    pub fn var_at(&self, index: usize) -> &VarId {
        self.eqs.get_index(index).expect("variable index in range").0
    }

    /// Parameters in order of first occurrence.
    pub fn params(&self) -> impl Iterator<Item = &P> + '_ {
        self.eqs.values().filter_map(|rhs| match rhs {
            FlatRhs::Param(p) => Some(p),
            FlatRhs::Op { .. } => None,
        })
    }

    /// Arguments resolved to positions, one entry per variable.
    pub fn layout(&self) -> Layout<'_, P> {
        let args = self
            .eqs
            .values()
            .map(|rhs| match rhs {
                FlatRhs::Op { args, .. } => args
                    .iter()
                    .map(|a| self.eqs.get_index_of(a).expect("validated"))
                    .collect(),
                FlatRhs::Param(_) => Vec::new(),
            })
            .collect();
        Layout { sys: self, args }
    }

    /// `h ▹ e` for a total function `h`.
    pub fn map_params<Q>(&self, mut h: impl FnMut(&P) -> Q) -> FlatSystem<Q> {
        FlatSystem {
            sig: self.sig.clone(),
            eqs: self
                .eqs
                .iter()
                .map(|(x, rhs)| (x.clone(), rhs.map_param(&mut h)))
                .collect(),
        }
    }

    /// `h ▹ e` for a partial function `h`; the first failure aborts.
    pub fn try_map_params<Q, E>(&self, mut h: impl FnMut(&P) -> Result<Q, E>) -> Result<FlatSystem<Q>, E> {
        let mut eqs = IndexMap::with_capacity(self.eqs.len());
        for (x, rhs) in &self.eqs {
            let rhs = match rhs {
                FlatRhs::Op { op, args } => FlatRhs::Op {
                    op: op.clone(),
                    args: args.clone(),
                },
                FlatRhs::Param(p) => FlatRhs::Param(h(p)?),
            };
            eqs.insert(x.clone(), rhs);
        }
        Ok(FlatSystem {
            sig: self.sig.clone(),
            eqs,
        })
    }

    /// Same equations over a larger signature.
    pub fn with_signature(self, sig: Signature) -> Result<Self, SystemError> {
        if !self.sig.is_subsignature_of(&sig) {
            return Err(SystemError::SignatureMismatch);
        }
        Ok(FlatSystem { sig, eqs: self.eqs })
    }

    /// Variables reachable from `root` following operation arguments,
    /// in breadth-first order.
    pub fn reachable_from(&self, root: &VarId) -> Vec<VarId> {
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root.clone()]);
        seen.insert(root.clone());
        while let Some(x) = queue.pop_front() {
            if let Some(FlatRhs::Op { args, .. }) = self.eqs.get(&x) {
                for a in args {
                    if seen.insert(a.clone()) {
                        queue.push_back(a.clone());
                    }
                }
            }
            order.push(x);
        }
        order
    }

    /// Keeps only the given variables, in declaration order. The caller
    /// guarantees the kept set is closed under arguments.
    pub(crate) fn restrict(&self, keep: &HashSet<VarId>) -> FlatSystem<P>
    where
        P: Clone,
    {
        FlatSystem {
            sig: self.sig.clone(),
            eqs: self
                .eqs
                .iter()
                .filter(|(x, _)| keep.contains(*x))
                .map(|(x, r)| (x.clone(), r.clone()))
                .collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(sig: Signature, eqs: IndexMap<VarId, FlatRhs<P>>) -> Self {
        FlatSystem { sig, eqs }
    }

    pub fn into_equations(self) -> impl Iterator<Item = (VarId, FlatRhs<P>)> {
        self.eqs.into_iter()
    }
}

impl<P: Clone> FlatSystem<P> {
    /// Renames variables with an injective map.
    pub fn rename_vars(&self, mut f: impl FnMut(&VarId) -> VarId) -> FlatSystem<P> {
        FlatSystem {
            sig: self.sig.clone(),
            eqs: self.eqs.iter().map(|(x, rhs)| (f(x), rhs.map_vars(&mut f))).collect(),
        }
    }
}

pub struct Layout<'a, P> {
    sys: &'a FlatSystem<P>,
    args: Vec<Vec<usize>>,
}

impl<'a, P> Layout<'a, P> {
    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    pub fn step(&self, i: usize) -> Step<'_, P> {
        match &self.sys.eqs[i] {
            FlatRhs::Op { op, .. } => Step::Op(op, &self.args[i]),
            FlatRhs::Param(p) => Step::Param(p),
        }
    }
}

/// `h ▹ e` where `h` is given as a finite table.
pub fn rename_params<P, Q>(h: &HashMap<P, Q>, e: &FlatSystem<P>) -> Result<FlatSystem<Q>, SystemError>
where
    P: std::hash::Hash + Eq + fmt::Debug,
    Q: Clone,
{
    e.try_map_params(|p| {
        h.get(p)
            .cloned()
            .ok_or_else(|| SystemError::MissingParamImage(format!("{p:?}")))
    })
}

/// The simultaneous system `f ⊞ e: X ⊎ Y → H(X ⊎ Y) + P`.
///
/// `e` is a system whose parameters are variables of `f`. Variables of `e` are
/// tagged with [`LEFT_TAG`], variables of `f` with [`RIGHT_TAG`]. An equation
/// `x = param y` of `e` is replaced by (a tagged copy of) the right-hand side
/// of `y` in `f`.
pub fn pair<P: Clone>(f: &FlatSystem<P>, e: &FlatSystem<VarId>) -> Result<FlatSystem<P>, SystemError> {
    if f.sig != e.sig {
        return Err(SystemError::SignatureMismatch);
    }
    let mut eqs = IndexMap::with_capacity(e.len() + f.len());
    for (x, rhs) in &e.eqs {
        let out = match rhs {
            FlatRhs::Op { op, args } => FlatRhs::Op {
                op: op.clone(),
                args: args.iter().map(inl).collect(),
            },
            FlatRhs::Param(y) => f
                .eqs
                .get(y)
                .ok_or_else(|| SystemError::ParamNotAVariable(y.clone()))?
                .map_vars(inr),
        };
        eqs.insert(inl(x), out);
    }
    for (y, rhs) in &f.eqs {
        eqs.insert(inr(y), rhs.map_vars(inr));
    }
    Ok(FlatSystem {
        sig: f.sig.clone(),
        eqs,
    })
}

/// Whether `h: X → Y` is a morphism of equations from `e` to `f`, i.e. a
/// homomorphism of `H(-) + P` coalgebras.
pub fn is_equation_morphism<P: PartialEq>(h: &HashMap<VarId, VarId>, e: &FlatSystem<P>, f: &FlatSystem<P>) -> bool {
    e.eqs.iter().all(|(x, ex)| {
        let Some(fx) = h.get(x).and_then(|y| f.eqs.get(y)) else {
            return false;
        };
        match (ex, fx) {
            (FlatRhs::Op { op: o1, args: a1 }, FlatRhs::Op { op: o2, args: a2 }) => {
                o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(a, b)| h.get(a) == Some(b))
            }
            (FlatRhs::Param(p), FlatRhs::Param(q)) => p == q,
            _ => false,
        }
    })
}

/// A finite term over a signature, variables and parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term<P> {
    Var(VarId),
    Param(P),
    Op(String, Vec<Term<P>>),
}

impl<P> Term<P> {
    pub fn var(name: &str) -> Self {
        Term::Var(VarId::new(name))
    }

    pub fn op(op: &str, args: Vec<Term<P>>) -> Self {
        Term::Op(op.to_owned(), args)
    }
}

impl<P: fmt::Display> fmt::Display for Term<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Param(p) => write!(f, "param {p}"),
            Term::Op(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Deterministic supply of auxiliary variable names `$0`, `$1`, ...
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    next: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: usize) -> Self {
        FreshNames { next }
    }

    fn next_avoiding(&mut self, taken: &HashSet<VarId>) -> VarId {
        loop {
            let candidate = VarId(format!("{FRESH_PREFIX}{}", self.next));
            self.next += 1;
            if !taken.contains(&candidate) {
                return candidate;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flattened<P> {
    pub system: FlatSystem<P>,
    /// Original variable to its variable in `system`.
    pub embedding: IndexMap<VarId, VarId>,
}

/// Turns arbitrary finite terms into a flat system.
///
/// Every proper subterm that is not a variable gets its own auxiliary
/// variable (one per occurrence, no sharing). Auxiliaries are introduced
/// level by level, left to right, right after the equation that needs them.
pub fn flatten<P: Clone>(
    sig: &Signature,
    equations: Vec<(VarId, Term<P>)>,
    fresh: &mut FreshNames,
) -> Result<Flattened<P>, SystemError> {
    let taken: HashSet<VarId> = equations.iter().map(|(x, _)| x.clone()).collect();
    let mut out: Vec<(VarId, FlatRhs<P>)> = Vec::new();
    let mut embedding = IndexMap::new();
    for (x, term) in equations {
        embedding.insert(x.clone(), x.clone());
        let mut queue = VecDeque::from([(x, term)]);
        while let Some((var, term)) = queue.pop_front() {
            let rhs = match term {
                Term::Var(_) => return Err(SystemError::UnguardedVariable(var)),
                Term::Param(p) => FlatRhs::Param(p),
                Term::Op(op, args) => {
                    let mut vars = Vec::with_capacity(args.len());
                    for arg in args {
                        match arg {
                            Term::Var(y) => vars.push(y),
                            other => {
                                let z = fresh.next_avoiding(&taken);
                                vars.push(z.clone());
                                queue.push_back((z, other));
                            }
                        }
                    }
                    FlatRhs::Op { op, args: vars }
                }
            };
            out.push((var, rhs));
        }
    }
    let system = FlatSystem::new(sig.clone(), out)?;
    Ok(Flattened { system, embedding })
}

impl<P: fmt::Display> fmt::Display for FlatSystem<P> {
    /// The line-based system format: `sig` lines, then `var` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (op, n) in self.sig.ops() {
            writeln!(f, "sig {op} {n}")?;
        }
        for (x, rhs) in &self.eqs {
            match rhs {
                FlatRhs::Op { op, args } => {
                    let args: Vec<&str> = args.iter().map(VarId::as_str).collect();
                    writeln!(f, "var {x} = {op}({})", args.join(","))?;
                }
                FlatRhs::Param(p) => writeln!(f, "var {x} = param {p}")?,
            }
        }
        Ok(())
    }
}
