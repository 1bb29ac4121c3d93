use crate::rational::{apply_layer, bisimilar, solve_in_r, RationalTree};
use crate::system::{FlatSystem, Signature};

use super::{ensure_signature, AlgebraError, ElgotAlgebra, Solution};

/// The free iterative algebra `R_Σ Y` of rational trees over string labels.
///
/// Solutions are unique, so the chosen one is the only one.
#[derive(Clone, Debug)]
pub struct FreeRational {
    sig: Signature,
    labels: Vec<String>,
}

impl FreeRational {
    pub fn new(sig: Signature, labels: Vec<String>) -> Self {
        FreeRational { sig, labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

impl ElgotAlgebra for FreeRational {
    type Elem = RationalTree<String>;

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn apply(&self, op: &str, args: &[Self::Elem]) -> Result<Self::Elem, AlgebraError> {
        Ok(apply_layer(&self.sig, op, args)?)
    }

    fn dagger(&self, e: &FlatSystem<Self::Elem>) -> Result<Solution<Self::Elem>, AlgebraError> {
        ensure_signature(&self.sig, e)?;
        let e = e.clone().with_signature(self.sig.clone())?;
        Ok(solve_in_r(&e)?.into_iter().collect())
    }

    fn agree(&self, a: &Self::Elem, b: &Self::Elem, _slack: f64) -> bool {
        bisimilar(a, b)
    }
}
