use crate::system::{FlatRhs, FlatSystem, Signature, VarId};

use super::AlgebraError;

/// Finite system for the eventually periodic stream `prefix · cycle^ω`:
/// `x_n = op(a_n, x_{n+1})`, where the last position loops back to the
/// start of the cycle.
///
/// The recursion variables are `x0, x1, ...` (one per position); each
/// position also gets a parameter variable `a0, a1, ...` holding its element,
/// since flat right-hand sides only take variables as arguments.
pub fn build_stream_system<P: Clone>(
    sig: &Signature,
    prefix: &[P],
    cycle: &[P],
    op: &str,
) -> Result<FlatSystem<P>, AlgebraError> {
    match sig.arity(op) {
        Some(2) => {}
        Some(n) => {
            return Err(AlgebraError::ArityMismatch {
                op: op.to_owned(),
                expected: 2,
                found: n,
            })
        }
        None => return Err(AlgebraError::UnknownOp(op.to_owned())),
    }
    if cycle.is_empty() {
        return Err(AlgebraError::EmptyCycle);
    }
    let len = prefix.len() + cycle.len();
    let x = |n: usize| VarId::new(format!("x{n}"));
    let a = |n: usize| VarId::new(format!("a{n}"));
    let mut eqs = Vec::with_capacity(2 * len);
    for n in 0..len {
        let next = if n + 1 == len { prefix.len() } else { n + 1 };
        eqs.push((x(n), FlatRhs::op(op, [a(n), x(next)])));
    }
    for (n, p) in prefix.iter().chain(cycle).enumerate() {
        eqs.push((a(n), FlatRhs::Param(p.clone())));
    }
    Ok(FlatSystem::new(sig.clone(), eqs)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_of_a_stream_system() {
        let sig = Signature::from_ops([("avg4", 2)]).unwrap();
        let e = build_stream_system(&sig, &["p"], &["c", "d"], "avg4").unwrap();
        assert_eq!(
            e.to_string(),
            "sig avg4 2\nvar x0 = avg4(a0,x1)\nvar x1 = avg4(a1,x2)\nvar x2 = avg4(a2,x1)\n\
             var a0 = param p\nvar a1 = param c\nvar a2 = param d\n"
        );
    }

    #[test]
    fn errors() {
        let sig = Signature::from_ops([("avg4", 2), ("s", 1)]).unwrap();
        assert_eq!(
            build_stream_system::<f64>(&sig, &[], &[], "avg4").unwrap_err(),
            AlgebraError::EmptyCycle
        );
        assert!(matches!(
            build_stream_system(&sig, &[], &[0.5], "s"),
            Err(AlgebraError::ArityMismatch { .. })
        ));
        assert_eq!(
            build_stream_system(&sig, &[], &[0.5], "t").unwrap_err(),
            AlgebraError::UnknownOp("t".into())
        );
    }
}
