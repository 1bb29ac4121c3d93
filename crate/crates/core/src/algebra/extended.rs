use indexmap::IndexMap;

use crate::system::{FlatRhs, FlatSystem, Signature};

use super::{AlgebraError, ElgotAlgebra, Solution};

/// Element of `HA + Y`: one layer over the inner carrier, or a label.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtElem<A> {
    Layer { op: String, args: Vec<A> },
    Label(String),
}

/// The algebra on `HA + Y` built from an Elgot algebra `A` and a labelling
/// `m: Y → A`.
///
/// The structure is `inl · H[α, m]`. A system `e` over `HA + Y` is solved by
/// first solving `[α, m] ▹ e` in `A` and then putting one layer on top:
/// `([H ē†, HA] + Y) · e`.
#[derive(Clone, Debug)]
pub struct ExtendedAlgebra<A: ElgotAlgebra> {
    inner: A,
    labels: IndexMap<String, A::Elem>,
}

impl<A: ElgotAlgebra> ExtendedAlgebra<A> {
    pub fn new(inner: A, labels: IndexMap<String, A::Elem>) -> Self {
        ExtendedAlgebra { inner, labels }
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    pub fn labels(&self) -> &IndexMap<String, A::Elem> {
        &self.labels
    }

    /// The map `[α, m]: HA + Y → A`.
    pub fn collapse(&self, z: &ExtElem<A::Elem>) -> Result<A::Elem, AlgebraError> {
        match z {
            ExtElem::Layer { op, args } => self.inner.apply(op, args),
            ExtElem::Label(y) => self
                .labels
                .get(y)
                .cloned()
                .ok_or_else(|| AlgebraError::UnknownLabel(y.clone())),
        }
    }
}

impl<A: ElgotAlgebra> ElgotAlgebra for ExtendedAlgebra<A> {
    type Elem = ExtElem<A::Elem>;

    fn signature(&self) -> &Signature {
        self.inner.signature()
    }

    fn apply(&self, op: &str, args: &[Self::Elem]) -> Result<Self::Elem, AlgebraError> {
        let arity = self
            .signature()
            .arity(op)
            .ok_or_else(|| AlgebraError::UnknownOp(op.to_owned()))?;
        if arity != args.len() {
            return Err(AlgebraError::ArityMismatch {
                op: op.to_owned(),
                expected: arity,
                found: args.len(),
            });
        }
        let args = args.iter().map(|z| self.collapse(z)).collect::<Result<_, _>>()?;
        Ok(ExtElem::Layer {
            op: op.to_owned(),
            args,
        })
    }

    fn dagger(&self, e: &FlatSystem<Self::Elem>) -> Result<Solution<Self::Elem>, AlgebraError> {
        let collapsed = e.try_map_params(|z| self.collapse(z))?;
        let inner = self.inner.dagger(&collapsed)?;
        Ok(e.equations()
            .map(|(x, rhs)| {
                let value = match rhs {
                    FlatRhs::Op { op, args } => ExtElem::Layer {
                        op: op.clone(),
                        args: args.iter().map(|a| inner[a].clone()).collect(),
                    },
                    FlatRhs::Param(z) => z.clone(),
                };
                (x.clone(), value)
            })
            .collect())
    }

    fn agree(&self, a: &Self::Elem, b: &Self::Elem, slack: f64) -> bool {
        match (a, b) {
            (ExtElem::Layer { op: o1, args: a1 }, ExtElem::Layer { op: o2, args: a2 }) => {
                o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| self.inner.agree(x, y, slack))
            }
            (ExtElem::Label(y1), ExtElem::Label(y2)) => y1 == y2,
            _ => false,
        }
    }
}
