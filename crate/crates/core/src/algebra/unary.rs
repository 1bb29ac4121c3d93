use crate::system::{FlatSystem, Signature, Step};

use super::{
    ensure_signature, AlgebraError, ElemId, ElgotAlgebra, FiniteAlgebra, FiniteCarrier, KleeneAlgebra, Solution,
};

/// A single unary operation `s: A → A` with a chosen fixed point `a0`.
///
/// A variable whose chain `x = s(x1), x1 = s(x2), ..., xk = a` ends in a
/// parameter gets `s^k(a)`; a variable whose chain runs into a cycle gets `a0`.
#[derive(Clone, Debug)]
pub struct UnaryAlgebra {
    base: FiniteAlgebra,
    op: String,
    fixpoint: Option<ElemId>,
}

impl UnaryAlgebra {
    pub fn new(base: FiniteAlgebra, fixpoint: Option<ElemId>) -> Result<Self, AlgebraError> {
        let op = {
            let mut ops = base.signature().ops();
            match (ops.next(), ops.next()) {
                (Some((op, 1)), None) => op.to_owned(),
                _ => return Err(AlgebraError::NotUnary),
            }
        };
        if let Some(a0) = fixpoint {
            if base.eval(&op, &[a0])? != a0 {
                return Err(AlgebraError::NotAFixedPoint(base.name(a0).to_owned()));
            }
        }
        Ok(UnaryAlgebra { base, op, fixpoint })
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn op(&self) -> &str {
        &self.op
    }

    pub fn fixpoint(&self) -> Option<ElemId> {
        self.fixpoint
    }

    /// The same operation on the flat order with least element `a0`.
    pub fn flat_cpo(&self) -> Result<KleeneAlgebra, AlgebraError> {
        let a0 = self.fixpoint.ok_or(AlgebraError::MissingBottom)?;
        let pairs: Vec<_> = self.base.elements().map(|x| (a0, x)).collect();
        KleeneAlgebra::new(self.base.clone().with_order(&pairs, a0)?)
    }

    fn power(&self, k: usize, a: ElemId) -> ElemId {
        let table = self.base.table(&self.op);
        (0..k).fold(a, |acc, _| table[acc.0])
    }
}

impl ElgotAlgebra for UnaryAlgebra {
    type Elem = ElemId;

    fn signature(&self) -> &Signature {
        self.base.signature()
    }

    fn apply(&self, op: &str, args: &[ElemId]) -> Result<ElemId, AlgebraError> {
        self.base.eval(op, args)
    }

    fn dagger(&self, e: &FlatSystem<ElemId>) -> Result<Solution<ElemId>, AlgebraError> {
        ensure_signature(self.signature(), e)?;
        let layout = e.layout();
        let mut out = Vec::with_capacity(e.len());
        for start in 0..layout.len() {
            let mut seen = vec![false; layout.len()];
            let mut current = start;
            let mut steps = 0;
            let value = loop {
                if seen[current] {
                    break self
                        .fixpoint
                        .ok_or_else(|| crate::algebra::AlgebraError::NoFixedPoint(e.var_at(start).clone()))?;
                }
                seen[current] = true;
                match layout.step(current) {
                    Step::Param(&a) => break self.power(steps, a),
                    Step::Op(_, args) => {
                        current = args[0];
                        steps += 1;
                    }
                }
            };
            out.push((e.var_at(start).clone(), value));
        }
        Ok(out.into_iter().collect())
    }

    fn agree(&self, a: &ElemId, b: &ElemId, _slack: f64) -> bool {
        a == b
    }
}

impl FiniteCarrier for UnaryAlgebra {
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

    /// Z/4 successor has no fixed point; add a sink so `sink` is one.
    fn succ_with_sink() -> UnaryAlgebra {
        let base = FiniteAlgebra::new(["0", "1", "2", "3", "sink"])
            .unwrap()
            .with_op("s", 1, |a| {
                if a[0].0 == 4 {
                    ElemId(4)
                } else {
                    ElemId((a[0].0 + 1) % 4)
                }
            })
            .unwrap();
        UnaryAlgebra::new(base, Some(ElemId(4))).unwrap()
    }

    fn system(eqs: Vec<(&str, FlatRhs<ElemId>)>) -> FlatSystem<ElemId> {
        let sig = crate::system::Signature::from_ops([("s", 1)]).unwrap();
        FlatSystem::new(sig, eqs.into_iter().map(|(x, r)| (v(x), r)).collect()).unwrap()
    }

    #[test]
    fn cycle_goes_to_fixpoint() {
        let e = system(vec![("x", FlatRhs::op("s", [v("x")]))]);
        assert_eq!(succ_with_sink().dagger(&e).unwrap()[&v("x")], ElemId(4));
    }

    #[test]
    fn chain_applies_operation_k_times() {
        let e = system(vec![
            ("x0", FlatRhs::op("s", [v("x1")])),
            ("x1", FlatRhs::Param(ElemId(1))),
        ]);
        let sol = succ_with_sink().dagger(&e).unwrap();
        assert_eq!(sol[&v("x0")], ElemId(2));
        assert_eq!(sol[&v("x1")], ElemId(1));

        let e = system(vec![
            ("x0", FlatRhs::op("s", [v("x1")])),
            ("x1", FlatRhs::op("s", [v("x2")])),
            ("x2", FlatRhs::op("s", [v("x3")])),
            ("x3", FlatRhs::Param(ElemId(3))),
        ]);
        assert_eq!(succ_with_sink().dagger(&e).unwrap()[&v("x0")], ElemId(2));
    }

    #[test]
    fn missing_fixpoint_is_an_error_only_on_cycles() {
        let base = FiniteAlgebra::new(["0", "1"])
            .unwrap()
            .with_op("s", 1, |a| ElemId(1 - a[0].0))
            .unwrap();
        let alg = UnaryAlgebra::new(base, None).unwrap();
        let cyc = system(vec![
            ("x", FlatRhs::op("s", [v("y")])),
            ("y", FlatRhs::op("s", [v("x")])),
        ]);
        assert_eq!(alg.dagger(&cyc).unwrap_err(), AlgebraError::NoFixedPoint(v("x")));
        let chain = system(vec![
            ("x", FlatRhs::op("s", [v("y")])),
            ("y", FlatRhs::Param(ElemId(0))),
        ]);
        assert_eq!(alg.dagger(&chain).unwrap()[&v("x")], ElemId(1));
    }

    #[test]
    fn construction_checks() {
        let swap = FiniteAlgebra::new(["0", "1"])
            .unwrap()
            .with_op("s", 1, |a| ElemId(1 - a[0].0))
            .unwrap();
        assert_eq!(
            UnaryAlgebra::new(swap, Some(ElemId(0))).unwrap_err(),
            AlgebraError::NotAFixedPoint("0".into())
        );
        let binary = FiniteAlgebra::new(["0"])
            .unwrap()
            .with_op("m", 2, |_| ElemId(0))
            .unwrap();
        assert_eq!(UnaryAlgebra::new(binary, None).unwrap_err(), AlgebraError::NotUnary);
    }
}
