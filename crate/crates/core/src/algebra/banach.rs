use std::fmt;

use num_rational::Ratio;

use crate::system::{FlatSystem, Signature, Step};

use super::{ensure_signature, AlgebraError, ElgotAlgebra, Solution};

type Q = Ratio<i64>;

/// `c + Σ cᵢ·xᵢ` with rational coefficients, evaluated in double precision.
///
/// Arguments are named `x y z w u v` by position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    constant: Q,
    coeffs: Vec<Q>,
}

pub const ARG_NAMES: [char; 6] = ['x', 'y', 'z', 'w', 'u', 'v'];

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl AffineMap {
    pub fn new(constant: Q, coeffs: Vec<Q>) -> Self {
        AffineMap { constant, coeffs }
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    /// Pads with zero coefficients up to `arity` arguments.
    pub fn with_arity(mut self, arity: usize) -> Self {
        if self.coeffs.len() < arity {
            self.coeffs.resize(arity, Q::from_integer(0));
        }
        self
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(args)
            .fold(to_f64(self.constant), |acc, (c, a)| acc + to_f64(*c) * a)
    }

    /// Lipschitz constant for the maximum metric on `[0,1]ⁿ`.
    pub fn lipschitz(&self) -> Q {
        self.coeffs
            .iter()
            .map(|&c| if c < Q::from_integer(0) { -c } else { c })
            .sum()
    }

    /// Whether `[0,1]ⁿ` is mapped into `[0,1]`.
    pub fn preserves_unit_interval(&self) -> bool {
        let zero = Q::from_integer(0);
        let low = self.constant + self.coeffs.iter().map(|c| (*c).min(zero)).sum::<Q>();
        let high = self.constant + self.coeffs.iter().map(|c| (*c).max(zero)).sum::<Q>();
        low >= zero && high <= Q::from_integer(1)
    }

    /// Parses an affine expression such as `(x+y)/4` or `1/2*x + 1/4`.
    pub fn parse(src: &str) -> Result<AffineMap, String> {
        let mut p = ExprParser {
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let value = p.sum()?;
        if p.pos != p.chars.len() {
            return Err(format!("unexpected `{}` in `{src}`", p.chars[p.pos]));
        }
        Ok(value)
    }

    fn scale(mut self, k: Q) -> Self {
        self.constant *= k;
        for c in &mut self.coeffs {
            *c *= k;
        }
        self
    }

    fn add(mut self, other: AffineMap) -> Self {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Q::from_integer(0));
        }
        self.constant += other.constant;
        for (c, d) in self.coeffs.iter_mut().zip(other.coeffs) {
            *c += d;
        }
        self
    }

    fn as_constant(&self) -> Option<Q> {
        self.coeffs
            .iter()
            .all(|c| *c == Q::from_integer(0))
            .then_some(self.constant)
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = self
            .coeffs
            .iter()
            .zip(ARG_NAMES)
            .filter(|(c, _)| **c != Q::from_integer(0))
            .map(|(c, name)| format!("{c}*{name}"))
            .collect();
        if self.constant != Q::from_integer(0) || terms.is_empty() {
            terms.push(self.constant.to_string());
        }
        f.write_str(&terms.join(" + "))
    }
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<AffineMap, String> {
        let mut acc = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = acc.add(if c == '-' { rhs.scale(Q::from_integer(-1)) } else { rhs });
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<AffineMap, String> {
        let mut acc = self.factor()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if c == '*' {
                match (acc.as_constant(), rhs.as_constant()) {
                    (Some(k), _) => rhs.scale(k),
                    (_, Some(k)) => acc.scale(k),
                    _ => return Err("product of two arguments is not affine".into()),
                }
            } else {
                match rhs.as_constant() {
                    Some(k) if k != Q::from_integer(0) => acc.scale(k.recip()),
                    Some(_) => return Err("division by zero".into()),
                    None => return Err("division by an argument is not affine".into()),
                }
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<AffineMap, String> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.factor()?.scale(Q::from_integer(-1)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) => match ARG_NAMES.iter().position(|&n| n == c) {
                Some(i) => {
                    self.pos += 1;
                    let mut coeffs = vec![Q::from_integer(0); i + 1];
                    coeffs[i] = Q::from_integer(1);
                    Ok(AffineMap::new(Q::from_integer(0), coeffs))
                }
                None => Err(format!("unexpected `{c}`")),
            },
            None => Err("unexpected end of expression".into()),
        }
    }

    /// Decimal literal, read exactly: `0.25` is `1/4`.
    fn number(&mut self) -> Result<AffineMap, String> {
        let mut value = Q::from_integer(0);
        while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
            value = value * 10 + i64::from(d);
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            let mut scale = Q::from_integer(1);
            let mut any = false;
            while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                scale /= 10;
                value += scale * i64::from(d);
                self.pos += 1;
                any = true;
            }
            if !any {
                return Err("digits expected after `.`".into());
            }
        }
        Ok(AffineMap::new(value, Vec::new()))
    }
}

/// Affine contractions on `[0,1]`; systems are solved by iterating from the
/// constant zero assignment until the a-posteriori error bound drops below
/// the tolerance.
#[derive(Clone, Debug)]
pub struct BanachAlgebra {
    sig: Signature,
    ops: Vec<AffineMap>,
    epsilon: f64,
    tolerance: f64,
}

impl BanachAlgebra {
    pub fn new(ops: Vec<(String, AffineMap)>, epsilon: f64, tolerance: f64) -> Result<Self, AlgebraError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(AlgebraError::BadEpsilon(epsilon));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(AlgebraError::BadTolerance(tolerance));
        }
        let mut sig = Signature::new();
        let mut maps = Vec::with_capacity(ops.len());
        for (op, map) in ops {
            let factor = to_f64(map.lipschitz());
            if factor > epsilon {
                return Err(AlgebraError::NotContracting { op, factor });
            }
            if !map.preserves_unit_interval() {
                return Err(AlgebraError::OutOfRange(op));
            }
            sig.declare(op, map.arity())?;
            maps.push(map);
        }
        Ok(BanachAlgebra {
            sig,
            ops: maps,
            epsilon,
            tolerance,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn map(&self, op: &str) -> Option<&AffineMap> {
        self.sig.ops().position(|(o, _)| o == op).map(|i| &self.ops[i])
    }

    /// `10·⌈log τ / log ε⌉`, at least one step.
    pub fn iteration_cap(&self) -> usize {
        if self.epsilon == 0.0 {
            return 1;
        }
        let ratio = (self.tolerance.ln() / self.epsilon.ln()).ceil().max(1.0);
        10 * ratio as usize
    }

    /// Solution together with the number of iteration steps taken.
    ///
    /// Stops once successive iterates are closer than `τ(1−ε)/ε`, so the
    /// returned iterate is within `τ` of the exact fixed point.
    pub fn iterate(&self, e: &FlatSystem<f64>) -> Result<(Solution<f64>, usize), AlgebraError> {
        self.iterate_observed(e, |_| {})
    }

    /// Every iterate after the starting point, in variable order.
    pub fn trace(&self, e: &FlatSystem<f64>) -> Result<Vec<Vec<f64>>, AlgebraError> {
        let mut out = Vec::new();
        self.iterate_observed(e, |v| out.push(v.to_vec()))?;
        Ok(out)
    }

    fn iterate_observed(
        &self,
        e: &FlatSystem<f64>,
        mut observe: impl FnMut(&[f64]),
    ) -> Result<(Solution<f64>, usize), AlgebraError> {
        ensure_signature(&self.sig, e)?;
        if let Some(&p) = e.params().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(AlgebraError::ParamOutOfRange(p));
        }
        let threshold = if self.epsilon == 0.0 {
            f64::INFINITY
        } else {
            self.tolerance * (1.0 - self.epsilon) / self.epsilon
        };
        let layout = e.layout();
        let mut current = vec![0.0; layout.len()];
        let mut args = Vec::new();
        for step in 1..=self.iteration_cap() {
            let mut next = Vec::with_capacity(layout.len());
            for i in 0..layout.len() {
                next.push(match layout.step(i) {
                    Step::Param(&p) => p,
                    Step::Op(op, vars) => {
                        args.clear();
                        args.extend(vars.iter().map(|&j| current[j]));
                        self.map(op).expect("signature checked").eval(&args)
                    }
                });
            }
            let moved = current
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            observe(&next);
            current = next;
            if moved < threshold {
                let sol = current
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| (e.var_at(i).clone(), a))
                    .collect();
                return Ok((sol, step));
            }
        }
        Err(AlgebraError::NonConvergence(self.iteration_cap()))
    }
}

impl ElgotAlgebra for BanachAlgebra {
    type Elem = f64;

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn apply(&self, op: &str, args: &[f64]) -> Result<f64, AlgebraError> {
        let map = self.map(op).ok_or_else(|| AlgebraError::UnknownOp(op.to_owned()))?;
        if map.arity() != args.len() {
            return Err(AlgebraError::ArityMismatch {
                op: op.to_owned(),
                expected: map.arity(),
                found: args.len(),
            });
        }
        Ok(map.eval(args))
    }

    fn dagger(&self, e: &FlatSystem<f64>) -> Result<Solution<f64>, AlgebraError> {
        Ok(self.iterate(e)?.0)
    }

    fn agree(&self, a: &f64, b: &f64, slack: f64) -> bool {
        (a - b).abs() <= slack * self.tolerance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{FlatRhs, VarId};

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn avg4() -> BanachAlgebra {
        BanachAlgebra::new(vec![("avg4".into(), AffineMap::parse("(x+y)/4").unwrap())], 0.5, 1e-9).unwrap()
    }

    #[test]
    fn parses_affine_expressions_exactly() {
        assert_eq!(
            AffineMap::parse("(x+y)/4").unwrap(),
            AffineMap::new(q(0, 1), vec![q(1, 4), q(1, 4)])
        );
        assert_eq!(
            AffineMap::parse("0.5*x + 0.25").unwrap(),
            AffineMap::new(q(1, 4), vec![q(1, 2)])
        );
        assert_eq!(
            AffineMap::parse("1 - x/2").unwrap(),
            AffineMap::new(q(1, 1), vec![q(-1, 2)])
        );
        assert_eq!(AffineMap::parse("y/3").unwrap().arity(), 2);
        assert!(AffineMap::parse("x*y").is_err());
        assert!(AffineMap::parse("1/x").is_err());
        assert!(AffineMap::parse("x/0").is_err());
        assert!(AffineMap::parse("(x").is_err());
        assert!(AffineMap::parse("q").is_err());
    }

    #[test]
    fn load_checks() {
        let wide = AffineMap::parse("(x+y)/2").unwrap();
        assert!(matches!(
            BanachAlgebra::new(vec![("m".into(), wide)], 0.5, 1e-9),
            Err(AlgebraError::NotContracting { .. })
        ));
        let shifted = AffineMap::parse("x/2 + 3/4").unwrap();
        assert_eq!(
            BanachAlgebra::new(vec![("m".into(), shifted)], 0.5, 1e-9).unwrap_err(),
            AlgebraError::OutOfRange("m".into())
        );
        assert_eq!(
            BanachAlgebra::new(vec![], 1.0, 1e-9).unwrap_err(),
            AlgebraError::BadEpsilon(1.0)
        );
        assert_eq!(
            BanachAlgebra::new(vec![], 0.5, 0.0).unwrap_err(),
            AlgebraError::BadTolerance(0.0)
        );
    }

    #[test]
    fn fixed_point_of_avg4_with_constant_one() {
        // x = (1 + x)/4 has the fixed point 1/3
        let sig = Signature::from_ops([("avg4", 2)]).unwrap();
        let e = FlatSystem::new(
            sig,
            vec![
                (VarId::new("x"), FlatRhs::op("avg4", [VarId::new("a"), VarId::new("x")])),
                (VarId::new("a"), FlatRhs::Param(1.0)),
            ],
        )
        .unwrap();
        let (sol, steps) = avg4().iterate(&e).unwrap();
        assert!((sol[&VarId::new("x")] - 1.0 / 3.0).abs() < 1e-9);
        assert!(steps <= avg4().iteration_cap());
        let trace = avg4().trace(&e).unwrap();
        assert_eq!(trace.len(), steps);
        assert_eq!(trace[0], vec![0.0, 1.0]);
        assert_eq!(trace.last().unwrap()[0], sol[&VarId::new("x")]);
    }

    #[test]
    fn iteration_cap_matches_formula() {
        // log(1e-9)/log(0.5) = 29.9 -> 30
        assert_eq!(avg4().iteration_cap(), 300);
    }

    #[test]
    fn parameters_outside_the_interval_are_rejected() {
        let sig = Signature::from_ops([("avg4", 2)]).unwrap();
        let e = FlatSystem::new(sig, vec![(VarId::new("a"), FlatRhs::Param(2.0))]).unwrap();
        assert_eq!(avg4().dagger(&e).unwrap_err(), AlgebraError::ParamOutOfRange(2.0));
    }

    #[test]
    fn constant_maps_converge_in_one_step() {
        let alg = BanachAlgebra::new(vec![("c".into(), AffineMap::parse("1/3").unwrap())], 0.0, 1e-9).unwrap();
        let sig = Signature::from_ops([("c", 0)]).unwrap();
        let e = FlatSystem::new(sig, vec![(VarId::new("x"), FlatRhs::op("c", []))]).unwrap();
        let (sol, steps) = alg.iterate(&e).unwrap();
        assert_eq!(steps, 1);
        assert!((sol[&VarId::new("x")] - 1.0 / 3.0).abs() < 1e-15);
    }
}
