//! Rational Σ-trees as pointed finite coalgebras.
//!
//! A [`RationalTree`] is a flat system together with a root variable; the
//! tree it denotes is the unfolding from the root. Two representations
//! denote the same tree exactly when their roots are bisimilar, so equality
//! of trees is always [`bisimilar`], never graph isomorphism.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::system::{pair, FlatRhs, FlatSystem, Signature, Step, SystemError, VarId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("root `{0}` is not a variable of the system")]
    UnknownRoot(VarId),
    #[error("operation `{0}` is not in the signature")]
    UnknownOp(String),
    #[error("`{op}` expects {expected} children, got {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("trees are over different signatures")]
    SignatureMismatch,
    #[error(transparent)]
    System(#[from] SystemError),
}

/// An element of `R_Σ Y`: a finite system over leaf labels `Y` and a root.
///
/// Only states reachable from the root are kept.
///
/// `==` compares presentations; use [`bisimilar`] for equality of trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalTree<Y> {
    sys: FlatSystem<Y>,
    root: VarId,
}

impl<Y> RationalTree<Y> {
    pub fn system(&self) -> &FlatSystem<Y> {
        &self.sys
    }

    pub fn root(&self) -> &VarId {
        &self.root
    }

    pub fn signature(&self) -> &Signature {
        self.sys.signature()
    }

    pub fn state_count(&self) -> usize {
        self.sys.len()
    }

    pub fn root_rhs(&self) -> &FlatRhs<Y> {
        self.sys.rhs(&self.root).expect("root is a state")
    }

    /// Labels of all reachable leaves, with repetitions.
    pub fn leaf_labels(&self) -> impl Iterator<Item = &Y> + '_ {
        self.sys.params()
    }
}

impl<Y: Clone> RationalTree<Y> {
    pub fn new(sys: &FlatSystem<Y>, root: &VarId) -> Result<Self, TreeError> {
        if !sys.contains(root) {
            return Err(TreeError::UnknownRoot(root.clone()));
        }
        let keep: HashSet<VarId> = sys.reachable_from(root).into_iter().collect();
        Ok(RationalTree {
            sys: sys.restrict(&keep),
            root: root.clone(),
        })
    }

    pub fn map_labels<Z>(&self, f: impl FnMut(&Y) -> Z) -> RationalTree<Z> {
        RationalTree {
            sys: self.sys.map_params(f),
            root: self.root.clone(),
        }
    }

    pub fn try_map_labels<Z, E>(&self, f: impl FnMut(&Y) -> Result<Z, E>) -> Result<RationalTree<Z>, E> {
        Ok(RationalTree {
            sys: self.sys.try_map_params(f)?,
            root: self.root.clone(),
        })
    }

    /// Whether the denoted tree is finite (no cycle reachable from the root).
    pub fn is_finite(&self) -> bool {
        let layout = self.sys.layout();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; layout.len()];
        fn visit<Y>(i: usize, layout: &crate::system::Layout<'_, Y>, mark: &mut [u8]) -> bool {
            match mark[i] {
                1 => return false,
                2 => return true,
                _ => {}
            }
            mark[i] = 1;
            if let Step::Op(_, args) = layout.step(i) {
                for &a in args {
                    if !visit(a, layout, mark) {
                        return false;
                    }
                }
            }
            mark[i] = 2;
            true
        }
        let root = self.sys.index_of(&self.root).expect("root is a state");
        visit(root, &layout, &mut mark)
    }
}

/// The unit `η_Y`: a single leaf labelled `y`.
pub fn eta<Y: Clone>(sig: &Signature, y: Y) -> RationalTree<Y> {
    let root = VarId::new("r");
    let sys = FlatSystem::new(sig.clone(), vec![(root.clone(), FlatRhs::Param(y))]).expect("a leaf is well formed");
    RationalTree { sys, root }
}

type Union<Y> = (IndexMap<VarId, FlatRhs<Y>>, Vec<VarId>);

/// Disjoint union of the systems of `trees`; state `v` of tree `i` becomes `i:v`.
fn disjoint_union<Y: Clone>(sig: &Signature, trees: &[&RationalTree<Y>]) -> Result<Union<Y>, TreeError> {
    let mut eqs = IndexMap::new();
    let mut roots = Vec::with_capacity(trees.len());
    for (i, t) in trees.iter().enumerate() {
        if t.signature() != sig {
            return Err(TreeError::SignatureMismatch);
        }
        let tag = |v: &VarId| VarId::new(format!("{i}:{v}"));
        for (x, rhs) in t.sys.equations() {
            eqs.insert(tag(x), rhs.map_vars(tag));
        }
        roots.push(tag(&t.root));
    }
    Ok((eqs, roots))
}

/// The algebra structure `ρ_Y: H R_Σ Y → R_Σ Y`: a new root labelled `op`
/// over the given children.
pub fn apply_layer<Y: Clone>(
    sig: &Signature,
    op: &str,
    children: &[RationalTree<Y>],
) -> Result<RationalTree<Y>, TreeError> {
    let arity = sig.arity(op).ok_or_else(|| TreeError::UnknownOp(op.to_owned()))?;
    if arity != children.len() {
        return Err(TreeError::ArityMismatch {
            op: op.to_owned(),
            expected: arity,
            found: children.len(),
        });
    }
    let refs: Vec<&RationalTree<Y>> = children.iter().collect();
    let (mut eqs, roots) = disjoint_union(sig, &refs)?;
    let root = VarId::new("root");
    eqs.insert(
        root.clone(),
        FlatRhs::Op {
            op: op.to_owned(),
            args: roots,
        },
    );
    let sys = FlatSystem::from_parts_unchecked(sig.clone(), eqs);
    RationalTree::new(&sys, &root)
}

/// The unique solution of `e` in the free iterative algebra `R_Σ Y`: every
/// variable is sent to the tree unfolded from it.
pub fn solve_free<Y: Clone>(e: &FlatSystem<Y>) -> IndexMap<VarId, RationalTree<Y>> {
    e.vars()
        .map(|x| (x.clone(), RationalTree::new(e, x).expect("variable of its own system")))
        .collect()
}

/// The unique solution of a system whose parameters are themselves trees.
///
/// The system is factored through the union `g` of all parameter systems
/// (one copy per parameter occurrence): `e0` sends `x = param t_k` to the
/// root of copy `k`, and the result is read off `g ⊞ e0` at the left states.
pub fn solve_in_r<Y: Clone>(e: &FlatSystem<RationalTree<Y>>) -> Result<IndexMap<VarId, RationalTree<Y>>, TreeError> {
    let sig = e.signature();
    let mut union_eqs = Vec::new();
    let mut factor = Vec::with_capacity(e.len());
    let mut copy = 0usize;
    for (x, rhs) in e.equations() {
        let rhs = match rhs {
            FlatRhs::Op { op, args } => FlatRhs::Op {
                op: op.clone(),
                args: args.clone(),
            },
            FlatRhs::Param(t) => {
                if t.signature() != sig {
                    return Err(TreeError::SignatureMismatch);
                }
                let tag = |v: &VarId| VarId::new(format!("t{copy}.{v}"));
                union_eqs.extend(t.sys.equations().map(|(z, r)| (tag(z), r.map_vars(tag))));
                let root = tag(&t.root);
                copy += 1;
                FlatRhs::Param(root)
            }
        };
        factor.push((x.clone(), rhs));
    }
    let g = FlatSystem::new(sig.clone(), union_eqs)?;
    let e0 = FlatSystem::new(sig.clone(), factor)?;
    let joint = pair(&g, &e0)?;
    e.vars()
        .map(|x| Ok((x.clone(), RationalTree::new(&joint, &crate::system::inl(x))?)))
        .collect()
}

/// Monad multiplication `μ_Y: R R Y → R Y`: every leaf holding a tree is
/// replaced by that tree.
pub fn substitute<Y: Clone>(t: &RationalTree<RationalTree<Y>>) -> Result<RationalTree<Y>, TreeError> {
    let sig = t.signature();
    let outer = |v: &VarId| VarId::new(format!("o.{v}"));
    let mut eqs = IndexMap::new();
    for (k, (x, rhs)) in t.sys.equations().enumerate() {
        match rhs {
            FlatRhs::Op { op, args } => {
                eqs.insert(
                    outer(x),
                    FlatRhs::Op {
                        op: op.clone(),
                        args: args.iter().map(outer).collect(),
                    },
                );
            }
            FlatRhs::Param(inner) => {
                if inner.signature() != sig {
                    return Err(TreeError::SignatureMismatch);
                }
                let tag = |v: &VarId| VarId::new(format!("{k}.{v}"));
                eqs.insert(outer(x), inner.root_rhs().map_vars(tag));
                for (z, r) in inner.sys.equations() {
                    eqs.insert(tag(z), r.map_vars(tag));
                }
            }
        }
    }
    let sys = FlatSystem::from_parts_unchecked(sig.clone(), eqs);
    RationalTree::new(&sys, &outer(&t.root))
}

/// Node kind used to seed partition refinement.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind<'a, Y> {
    Op(&'a str),
    Leaf(&'a Y),
}

impl<Y> Clone for Kind<'_, Y> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<Y> Copy for Kind<'_, Y> {}

/// Coarsest stable partition of the given states (Moore-style refinement).
///
/// `states[i]` is the kind and successor list of state `i`; the result maps
/// each state to its block number.
fn refine<Y: Ord>(states: &[(Kind<'_, Y>, Vec<usize>)]) -> Vec<usize> {
    let mut initial = BTreeMap::new();
    for (kind, _) in states {
        let next = initial.len();
        initial.entry(*kind).or_insert(next);
    }
    let mut block: Vec<usize> = states.iter().map(|(k, _)| initial[k]).collect();
    let mut count = initial.len();
    loop {
        let mut ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next_block: Vec<usize> = states
            .iter()
            .enumerate()
            .map(|(i, (_, succ))| {
                let key = (block[i], succ.iter().map(|&s| block[s]).collect());
                let fresh = ids.len();
                *ids.entry(key).or_insert(fresh)
            })
            .collect();
        let next_count = ids.len();
        block = next_block;
        if next_count == count {
            return block;
        }
        count = next_count;
    }
}

fn kinds<'a, Y>(sys: &'a FlatSystem<Y>, offset: usize, out: &mut Vec<(Kind<'a, Y>, Vec<usize>)>) {
    for (_, rhs) in sys.equations() {
        out.push(match rhs {
            FlatRhs::Op { op, args } => (
                Kind::Op(op),
                args.iter()
                    .map(|a| sys.index_of(a).expect("validated") + offset)
                    .collect(),
            ),
            FlatRhs::Param(y) => (Kind::Leaf(y), Vec::new()),
        });
    }
}

/// Whether two pointed systems unfold to the same Σ-tree.
pub fn bisimilar<Y: Ord>(s: &RationalTree<Y>, t: &RationalTree<Y>) -> bool {
    let mut states = Vec::with_capacity(s.state_count() + t.state_count());
    kinds(&s.sys, 0, &mut states);
    kinds(&t.sys, s.state_count(), &mut states);
    let block = refine(&states);
    let rs = s.sys.index_of(&s.root).expect("root is a state");
    let rt = t.sys.index_of(&t.root).expect("root is a state") + s.state_count();
    block[rs] == block[rt]
}

impl<Y: Clone + Ord> RationalTree<Y> {
    /// The minimal representation: one state per bisimilarity class.
    ///
    /// States are listed breadth-first from the root and keep the name of the
    /// first state of their class met in that order.
    pub fn minimize(&self) -> RationalTree<Y> {
        let mut states = Vec::with_capacity(self.state_count());
        kinds(&self.sys, 0, &mut states);
        let block = refine(&states);
        let mut rep: BTreeMap<usize, VarId> = BTreeMap::new();
        let mut order = Vec::new();
        for x in self.sys.reachable_from(&self.root) {
            let b = block[self.sys.index_of(&x).expect("state")];
            if let std::collections::btree_map::Entry::Vacant(slot) = rep.entry(b) {
                slot.insert(x.clone());
                order.push(x);
            }
        }
        let eqs = order
            .iter()
            .map(|x| {
                let rhs = self
                    .sys
                    .rhs(x)
                    .expect("state")
                    .map_vars(|a| rep[&block[self.sys.index_of(a).expect("state")]].clone());
                (x.clone(), rhs)
            })
            .collect();
        RationalTree {
            sys: FlatSystem::from_parts_unchecked(self.sys.signature().clone(), eqs),
            root: self.root.clone(),
        }
    }

    /// Number of distinct subtrees, i.e. states of the minimal representation.
    pub fn subtree_count(&self) -> usize {
        self.minimize().state_count()
    }
}

/// A depth-bounded prefix of a (possibly infinite) tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeTruncation<Y> {
    Node(String, Vec<TreeTruncation<Y>>),
    Leaf(Y),
    /// An operation node below the depth bound.
    Cut,
}

impl<Y> TreeTruncation<Y> {
    pub fn depth(&self) -> usize {
        match self {
            TreeTruncation::Node(_, children) => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
            TreeTruncation::Leaf(_) | TreeTruncation::Cut => 0,
        }
    }
}

impl<Y: fmt::Display> fmt::Display for TreeTruncation<Y> {
    /// S-expression form, `^` marks a cut: `(mul a (mul b ^))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeTruncation::Leaf(y) => write!(f, "{y}"),
            TreeTruncation::Cut => f.write_str("^"),
            TreeTruncation::Node(op, children) => {
                write!(f, "({op}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Unfolds `t` down to `depth` operation layers. Leaves are always shown;
/// an operation node at the bound becomes [`TreeTruncation::Cut`].
pub fn unfold<Y: Clone>(t: &RationalTree<Y>, depth: usize) -> TreeTruncation<Y> {
    fn go<Y: Clone>(sys: &FlatSystem<Y>, x: &VarId, left: usize) -> TreeTruncation<Y> {
        match sys.rhs(x).expect("state") {
            FlatRhs::Param(y) => TreeTruncation::Leaf(y.clone()),
            FlatRhs::Op { .. } if left == 0 => TreeTruncation::Cut,
            FlatRhs::Op { op, args } => {
                TreeTruncation::Node(op.clone(), args.iter().map(|a| go(sys, a, left - 1)).collect())
            }
        }
    }
    go(&t.sys, &t.root, depth)
}

impl<Y: fmt::Display> fmt::Display for RationalTree<Y> {
    /// System format followed by a `root` line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sys)?;
        writeln!(f, "root {}", self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> VarId {
        VarId::new(s)
    }

    fn sig() -> Signature {
        Signature::from_ops([("mul", 2), ("c", 0)]).unwrap()
    }

    fn op(name: &str, args: &[&str]) -> FlatRhs<String> {
        FlatRhs::op(name, args.iter().map(|a| v(a)))
    }

    fn param(p: &str) -> FlatRhs<String> {
        FlatRhs::Param(p.to_owned())
    }

    fn tree(eqs: Vec<(&str, FlatRhs<String>)>, root: &str) -> RationalTree<String> {
        let sys = FlatSystem::new(sig(), eqs.into_iter().map(|(x, r)| (v(x), r)).collect()).unwrap();
        RationalTree::new(&sys, &v(root)).unwrap()
    }

    fn idem() -> RationalTree<String> {
        tree(vec![("x", op("mul", &["x", "x"]))], "x")
    }

    fn comb() -> RationalTree<String> {
        tree(
            vec![
                ("x", op("mul", &["p", "y"])),
                ("p", param("a")),
                ("y", op("mul", &["q", "x"])),
                ("q", param("b")),
            ],
            "x",
        )
    }

    #[test]
    fn construction_prunes_unreachable_states() {
        let t = tree(vec![("x", param("a")), ("junk", op("mul", &["junk", "x"]))], "x");
        assert_eq!(t.state_count(), 1);
        let sys = FlatSystem::new(sig(), vec![(v("x"), param("a"))]).unwrap();
        assert_eq!(
            RationalTree::new(&sys, &v("nope")).unwrap_err(),
            TreeError::UnknownRoot(v("nope"))
        );
    }

    #[test]
    fn bisimilarity_examples() {
        let unfolded = tree(
            vec![("top", op("mul", &["x", "x"])), ("x", op("mul", &["x", "x"]))],
            "top",
        );
        assert!(bisimilar(&idem(), &unfolded));
        let two = tree(vec![("x", op("mul", &["y", "y"])), ("y", op("mul", &["x", "x"]))], "x");
        assert!(bisimilar(&idem(), &two));
        assert!(!bisimilar(&eta(&sig(), "a".to_string()), &eta(&sig(), "b".to_string())));
        assert!(bisimilar(&eta(&sig(), "a".to_string()), &eta(&sig(), "a".to_string())));
    }

    #[test]
    fn minimize_examples() {
        assert_eq!(idem().minimize().state_count(), 1);
        let two = tree(vec![("x", op("mul", &["y", "y"])), ("y", op("mul", &["x", "x"]))], "x");
        assert_eq!(two.minimize().state_count(), 1);
        assert_eq!(comb().minimize().state_count(), 4);
        assert_eq!(comb().subtree_count(), 4);
        assert_eq!(eta(&sig(), "a".to_string()).subtree_count(), 1);
        assert_eq!(idem().subtree_count(), 1);
    }

    #[test]
    fn minimize_flattened_worked_example() {
        // x1 = (x2*a)*b, x2 = x1*b, flattened without sharing
        let t = tree(
            vec![
                ("x1", op("mul", &["$0", "$1"])),
                ("$0", op("mul", &["x2", "$2"])),
                ("$1", param("b")),
                ("$2", param("a")),
                ("x2", op("mul", &["x1", "$3"])),
                ("$3", param("b")),
            ],
            "x1",
        );
        let m = t.minimize();
        assert_eq!(m.state_count(), 5);
        assert_eq!(
            m.system()
                .equations()
                .filter(|(_, r)| matches!(r, FlatRhs::Op { .. }))
                .count(),
            3
        );
    }

    #[test]
    fn minimize_merges_duplicated_comb() {
        // a*(b*(a*(b*...))) written with period 4
        let t = tree(
            vec![
                ("x0", op("mul", &["p0", "x1"])),
                ("p0", param("a")),
                ("x1", op("mul", &["p1", "x2"])),
                ("p1", param("b")),
                ("x2", op("mul", &["p2", "x3"])),
                ("p2", param("a")),
                ("x3", op("mul", &["p3", "x0"])),
                ("p3", param("b")),
            ],
            "x0",
        );
        let m = t.minimize();
        assert_eq!(m.state_count(), 4);
        assert!(bisimilar(&m, &comb()));
    }

    #[test]
    fn eta_labels_are_distinguished() {
        let leaves: Vec<_> = ["a", "b", "c"].iter().map(|y| eta(&sig(), y.to_string())).collect();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(bisimilar(&leaves[i], &leaves[j]), i == j);
            }
        }
    }

    #[test]
    fn apply_layer_examples() {
        let a = eta(&sig(), "a".to_string());
        let b = eta(&sig(), "b".to_string());
        let ab = apply_layer(&sig(), "mul", &[a.clone(), b.clone()]).unwrap();
        assert_eq!(unfold(&ab, 5).to_string(), "(mul a b)");
        assert!(ab.is_finite());

        let once = apply_layer(&sig(), "mul", &[idem(), idem()]).unwrap();
        let twice = apply_layer(&sig(), "mul", &[once.clone(), once.clone()]).unwrap();
        assert!(bisimilar(&once, &twice));
        assert!(bisimilar(&once, &idem()));

        let c = apply_layer::<String>(&sig(), "c", &[]).unwrap();
        assert_eq!(c.state_count(), 1);
        assert_eq!(unfold(&c, 1).to_string(), "(c)");

        assert_eq!(
            apply_layer(&sig(), "mul", &[a]).unwrap_err(),
            TreeError::ArityMismatch {
                op: "mul".into(),
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn unfold_examples() {
        let a = eta(&sig(), "a".to_string());
        for k in 0..4 {
            assert_eq!(unfold(&a, k), TreeTruncation::Leaf("a".to_string()));
        }
        assert_eq!(unfold(&idem(), 1).to_string(), "(mul ^ ^)");
        assert_eq!(unfold(&idem(), 0), TreeTruncation::Cut);
        assert_eq!(unfold(&comb(), 3).to_string(), "(mul a (mul b (mul a ^)))");
        assert_eq!(unfold(&comb(), 3).depth(), 3);
    }

    #[test]
    fn solve_free_examples() {
        let e = FlatSystem::new(sig(), vec![(v("x"), op("mul", &["x", "x"]))]).unwrap();
        let sol = solve_free(&e);
        assert!(bisimilar(&sol[&v("x")], &idem()));
        assert_eq!(sol[&v("x")].state_count(), 1);
        assert!(!sol[&v("x")].is_finite());

        let e = FlatSystem::new(sig(), vec![(v("x"), param("a"))]).unwrap();
        assert!(bisimilar(&solve_free(&e)[&v("x")], &eta(&sig(), "a".to_string())));
    }

    #[test]
    fn solve_in_r_examples() {
        let e = FlatSystem::new(sig(), vec![(v("x"), FlatRhs::Param(comb()))]).unwrap();
        assert!(bisimilar(&solve_in_r(&e).unwrap()[&v("x")], &comb()));

        let e = FlatSystem::<RationalTree<String>>::new(sig(), vec![(v("x"), FlatRhs::op("mul", [v("x"), v("x")]))])
            .unwrap();
        let got = solve_in_r(&e).unwrap()[&v("x")].minimize();
        assert!(bisimilar(&got, &idem()));
        assert_eq!(got.state_count(), 1);

        let other = Signature::from_ops([("mul", 2)]).unwrap();
        let leaf = eta(&other, "a".to_string());
        let bad = FlatSystem::new(sig(), vec![(v("x"), FlatRhs::Param(leaf))]).unwrap();
        assert_eq!(solve_in_r(&bad).unwrap_err(), TreeError::SignatureMismatch);
    }

    #[test]
    fn substitute_units() {
        let outer = eta(&sig(), comb());
        assert!(bisimilar(&substitute(&outer).unwrap(), &comb()));

        let wrapped = comb().map_labels(|y| eta(&sig(), y.clone()));
        assert!(bisimilar(&substitute(&wrapped).unwrap(), &comb()));
    }

    #[test]
    fn substitute_nested_comb() {
        // outer: mul(l, mul(r, ...)) with leaves holding comb and idem
        let outer: RationalTree<RationalTree<String>> = {
            let sys = FlatSystem::new(
                sig(),
                vec![
                    (v("x"), FlatRhs::op("mul", [v("l"), v("r")])),
                    (v("l"), FlatRhs::Param(comb())),
                    (v("r"), FlatRhs::Param(idem())),
                ],
            )
            .unwrap();
            RationalTree::new(&sys, &v("x")).unwrap()
        };
        let direct = apply_layer(&sig(), "mul", &[comb(), idem()]).unwrap();
        assert!(bisimilar(&substitute(&outer).unwrap(), &direct));
    }

    #[test]
    fn display_has_root_line() {
        assert_eq!(
            comb().to_string(),
            "sig mul 2\nsig c 0\nvar x = mul(p,y)\nvar p = param a\nvar y = mul(q,x)\nvar q = param b\nroot x\n"
        );
    }
}
