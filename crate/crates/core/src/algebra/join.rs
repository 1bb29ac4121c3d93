use crate::rational::solve_free;
use crate::system::{FlatSystem, Signature};

use super::{
    ensure_signature, tuples, AlgebraError, ElemId, ElgotAlgebra, FiniteAlgebra, FiniteCarrier, KleeneAlgebra, Solution,
};

/// A finite join semilattice with bottom; every operation is the join of its
/// arguments and a variable is solved by the join of all leaf labels of its
/// rational tree. A tree without leaves gets `⊥`.
#[derive(Clone, Debug)]
pub struct JoinAlgebra {
    base: FiniteAlgebra,
}

fn join_all(base: &FiniteAlgebra, items: impl IntoIterator<Item = ElemId>) -> ElemId {
    let bottom = base.bottom().expect("joins imply a bottom");
    items
        .into_iter()
        .fold(bottom, |acc, a| base.join(acc, a).expect("joins present"))
}

impl JoinAlgebra {
    /// Every table already present must be the join of its arguments.
    pub fn new(base: FiniteAlgebra) -> Result<Self, AlgebraError> {
        if !base.has_joins() {
            return Err(AlgebraError::JoinLaw("no join table".into()));
        }
        for (op, arity) in base.signature().ops() {
            for args in tuples(base.size(), arity) {
                if base.eval(op, &args)? != join_all(&base, args.iter().copied()) {
                    return Err(AlgebraError::TableNotJoin(op.to_owned()));
                }
            }
        }
        Ok(JoinAlgebra { base })
    }

    /// Adds join tables for the operations of `sig` not yet interpreted.
    pub fn extend_signature(&self, sig: &Signature) -> Result<Self, AlgebraError> {
        let merged = self.base.signature().merge(sig)?;
        let mut base = self.base.clone();
        for (op, arity) in merged.ops() {
            if self.base.signature().arity(op).is_none() {
                let lattice = self.base.clone();
                base = base.with_op(op, arity, |args| join_all(&lattice, args.iter().copied()))?;
            }
        }
        Ok(JoinAlgebra { base })
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn bottom(&self) -> ElemId {
        self.base.bottom().expect("joins imply a bottom")
    }

    pub fn join_of(&self, items: impl IntoIterator<Item = ElemId>) -> ElemId {
        join_all(&self.base, items)
    }

    /// The same lattice solved by Kleene iteration instead.
    pub fn as_kleene(&self) -> KleeneAlgebra {
        KleeneAlgebra::new(self.base.clone()).expect("joins are monotone")
    }
}

impl ElgotAlgebra for JoinAlgebra {
    type Elem = ElemId;

    fn signature(&self) -> &Signature {
        self.base.signature()
    }

    fn apply(&self, op: &str, args: &[ElemId]) -> Result<ElemId, AlgebraError> {
        self.base.eval(op, args)
    }

    fn dagger(&self, e: &FlatSystem<ElemId>) -> Result<Solution<ElemId>, AlgebraError> {
        ensure_signature(self.signature(), e)?;
        Ok(solve_free(e)
            .into_iter()
            .map(|(x, tree)| (x, self.join_of(tree.leaf_labels().copied())))
            .collect())
    }

    fn agree(&self, a: &ElemId, b: &ElemId, _slack: f64) -> bool {
        a == b
    }
}

impl FiniteCarrier for JoinAlgebra {
    fn elements(&self) -> Vec<ElemId> {
        self.base.elements().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{FlatRhs, VarId};

    fn v(s: &str) -> VarId {
        VarId::new(s)
    }

    fn diamond() -> JoinAlgebra {
        let [bot, a, b, top] = [0, 1, 2, 3].map(ElemId);
        let lattice = FiniteAlgebra::new(["bot", "a", "b", "top"])
            .unwrap()
            .with_joins(&[(a, b, top), (a, top, top), (b, top, top)], bot)
            .unwrap();
        JoinAlgebra::new(lattice)
            .unwrap()
            .extend_signature(&Signature::from_ops([("mul", 2)]).unwrap())
            .unwrap()
    }

    fn mul() -> Signature {
        Signature::from_ops([("mul", 2)]).unwrap()
    }

    #[test]
    fn joins_the_leaves() {
        let e = FlatSystem::new(
            mul(),
            vec![
                (v("x"), FlatRhs::op("mul", [v("y"), v("z")])),
                (v("y"), FlatRhs::Param(ElemId(1))),
                (v("z"), FlatRhs::Param(ElemId(2))),
            ],
        )
        .unwrap();
        let sol = diamond().dagger(&e).unwrap();
        assert_eq!(sol[&v("x")], ElemId(3));
        assert_eq!(diamond().as_kleene().dagger(&e).unwrap(), sol);
    }

    #[test]
    fn leafless_tree_is_bottom() {
        let e = FlatSystem::new(mul(), vec![(v("x"), FlatRhs::op("mul", [v("x"), v("x")]))]).unwrap();
        assert_eq!(diamond().dagger(&e).unwrap()[&v("x")], ElemId(0));
        assert_eq!(diamond().as_kleene().dagger(&e).unwrap()[&v("x")], ElemId(0));
    }

    #[test]
    fn rejects_tables_that_are_not_joins() {
        let [bot, a, b, top] = [0, 1, 2, 3].map(ElemId);
        let lattice = FiniteAlgebra::new(["bot", "a", "b", "top"])
            .unwrap()
            .with_joins(&[(a, b, top), (a, top, top), (b, top, top)], bot)
            .unwrap()
            .with_op("mul", 2, |_| top)
            .unwrap();
        assert_eq!(
            JoinAlgebra::new(lattice).unwrap_err(),
            AlgebraError::TableNotJoin("mul".into())
        );
    }

    #[test]
    fn extend_signature_rejects_conflicting_arity() {
        let sig = Signature::from_ops([("mul", 3)]).unwrap();
        assert!(diamond().extend_signature(&sig).is_err());
    }

    #[test]
    fn nullary_operation_is_bottom() {
        let alg = diamond()
            .extend_signature(&Signature::from_ops([("c", 0)]).unwrap())
            .unwrap();
        assert_eq!(alg.apply("c", &[]).unwrap(), ElemId(0));
    }
}
