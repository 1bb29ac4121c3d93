use crate::system::{FlatSystem, Signature, Step};

use super::{ensure_signature, tuples, AlgebraError, ElemId, ElgotAlgebra, FiniteAlgebra, FiniteCarrier, Solution};

/// A finite poset with least element and monotone operations; every system
/// is sent to its least solution.
#[derive(Clone, Debug)]
pub struct KleeneAlgebra {
    base: FiniteAlgebra,
}

impl KleeneAlgebra {
    pub fn new(base: FiniteAlgebra) -> Result<Self, AlgebraError> {
        if !base.is_ordered() {
            return Err(AlgebraError::MissingBottom);
        }
        let n = base.size();
        for (op, arity) in base.signature().ops() {
            for args in tuples(n, arity) {
                let here = base.eval(op, &args)?;
                for i in 0..arity {
                    for up in base.elements() {
                        if up == args[i] || base.leq(args[i], up) != Some(true) {
                            continue;
                        }
                        let mut raised = args.clone();
                        raised[i] = up;
                        if base.leq(here, base.eval(op, &raised)?) != Some(true) {
                            return Err(AlgebraError::NotMonotone(op.to_owned()));
                        }
                    }
                }
            }
        }
        Ok(KleeneAlgebra { base })
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    /// Least solution together with the number of steps that changed the
    /// approximation (the iterate after that many steps is the answer).
    pub fn least_solution(&self, e: &FlatSystem<ElemId>) -> Result<(Solution<ElemId>, usize), AlgebraError> {
        ensure_signature(self.signature(), e)?;
        let bottom = self.base.bottom().expect("checked at construction");
        let layout = e.layout();
        let mut current = vec![bottom; layout.len()];
        // the chain has at most |X| * |A| strict increases
        let cap = layout.len() * self.base.size() + 1;
        for steps in 0..=cap {
            let mut args = Vec::new();
            let next: Vec<ElemId> = (0..layout.len())
                .map(|i| match layout.step(i) {
                    Step::Param(&a) => Ok(a),
                    Step::Op(op, vars) => {
                        args.clear();
                        args.extend(vars.iter().map(|&j| current[j]));
                        self.base.eval(op, &args)
                    }
                })
                .collect::<Result<_, _>>()?;
            assert!(
                current
                    .iter()
                    .zip(&next)
                    .all(|(a, b)| self.base.leq(*a, *b) == Some(true)),
                "approximation chain must ascend"
            );
            if next == current {
                let sol = current
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| (e.var_at(i).clone(), a))
                    .collect();
                return Ok((sol, steps));
            }
            current = next;
        }
        Err(AlgebraError::NonConvergence(cap))
    }
}

impl ElgotAlgebra for KleeneAlgebra {
    type Elem = ElemId;

    fn signature(&self) -> &Signature {
        self.base.signature()
    }

    fn apply(&self, op: &str, args: &[ElemId]) -> Result<ElemId, AlgebraError> {
        self.base.eval(op, args)
    }

    fn dagger(&self, e: &FlatSystem<ElemId>) -> Result<Solution<ElemId>, AlgebraError> {
        Ok(self.least_solution(e)?.0)
    }

    fn agree(&self, a: &ElemId, b: &ElemId, _slack: f64) -> bool {
        a == b
    }
}

impl FiniteCarrier for KleeneAlgebra {
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

    /// Three-element chain 0 < 1 < 2 with saturating successor.
    fn chain() -> KleeneAlgebra {
        let base = FiniteAlgebra::new(["0", "1", "2"])
            .unwrap()
            .with_op("s", 1, |a| ElemId((a[0].0 + 1).min(2)))
            .unwrap()
            .with_order(&[(ElemId(0), ElemId(1)), (ElemId(1), ElemId(2))], ElemId(0))
            .unwrap();
        KleeneAlgebra::new(base).unwrap()
    }

    #[test]
    fn least_fixed_point_of_saturating_successor() {
        let sig = Signature::from_ops([("s", 1)]).unwrap();
        let e = FlatSystem::new(sig, vec![(v("x"), FlatRhs::op("s", [v("x")]))]).unwrap();
        let (sol, steps) = chain().least_solution(&e).unwrap();
        assert_eq!(sol[&v("x")], ElemId(2));
        assert_eq!(steps, 2);
    }

    #[test]
    fn rejects_antitone_operation() {
        let base = FiniteAlgebra::new(["0", "1"])
            .unwrap()
            .with_op("neg", 1, |a| ElemId(1 - a[0].0))
            .unwrap()
            .with_order(&[(ElemId(0), ElemId(1))], ElemId(0))
            .unwrap();
        assert_eq!(
            KleeneAlgebra::new(base).unwrap_err(),
            AlgebraError::NotMonotone("neg".into())
        );
    }

    #[test]
    fn requires_order() {
        let base = FiniteAlgebra::new(["0"]).unwrap();
        assert_eq!(KleeneAlgebra::new(base).unwrap_err(), AlgebraError::MissingBottom);
    }

    #[test]
    fn foreign_operation_is_a_signature_mismatch() {
        let sig = Signature::from_ops([("t", 1)]).unwrap();
        let e = FlatSystem::new(sig, vec![(v("x"), FlatRhs::op("t", [v("x")]))]).unwrap();
        assert_eq!(chain().dagger(&e).unwrap_err(), AlgebraError::SignatureMismatch);
    }
}
