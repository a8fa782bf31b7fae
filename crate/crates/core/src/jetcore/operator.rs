use std::fmt;

use num_traits::{One, Zero};

use super::poly::{Algebra, SuperPolynomial};
use crate::binomial::binomial_rational;
use crate::error::{Error, Result};

/// A scalar differential operator `sum_j P_j d^j` with theta-free coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOperator {
    alg: Algebra,
    coeffs: Vec<SuperPolynomial>,
}

impl DiffOperator {
    pub fn zero(alg: Algebra) -> Self {
        Self { alg, coeffs: Vec::new() }
    }

    /// Multiplication by a density (order-zero operator).
    pub fn multiplication(p: SuperPolynomial) -> Result<Self> {
        Self::new(p.algebra(), vec![p])
    }

    /// `d^j`.
    pub fn del_power(alg: Algebra, j: usize) -> Self {
        let mut coeffs = vec![alg.zero(); j + 1];
        coeffs[j] = alg.one();
        Self { alg, coeffs }
    }

    /// Coefficients indexed by power of `d`.
    pub fn new(alg: Algebra, coeffs: Vec<SuperPolynomial>) -> Result<Self> {
        for c in &coeffs {
            alg.compatible(&c.algebra())?;
            if !c.is_theta_free() {
                return Err(Error::OddCoefficient);
            }
        }
        let mut op = Self { alg, coeffs };
        op.trim();
        Ok(op)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn algebra(&self) -> Algebra {
        self.alg
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of `d` with nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, j: usize) -> SuperPolynomial {
        self.coeffs.get(j).cloned().unwrap_or_else(|| self.alg.zero())
    }

    pub fn coeffs(&self) -> &[SuperPolynomial] {
        &self.coeffs
    }

    /// Homogeneous of order `k` when every `P_j` is homogeneous of degree `k - j`.
    pub fn is_homogeneous_of_order(&self, k: i64) -> bool {
        self.coeffs.iter().enumerate().all(|(j, p)| {
            p.is_zero() || p.grading_info().ok().and_then(|g| g.degree) == Some(k - j as i64)
        })
    }

    pub fn to_hat(&self) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.to_hat()).collect::<Result<Vec<_>>>()?;
        Ok(Self { alg: Algebra::new(self.alg.q, true)?, coeffs })
    }

    /// Apply to a density: `sum_j P_j * d^j(f)`.
    pub fn apply(&self, f: &SuperPolynomial) -> SuperPolynomial {
        let mut out = self.alg.zero();
        let mut dj = f.clone();
        for (j, p) in self.coeffs.iter().enumerate() {
            if j > 0 {
                dj = dj.total_derivative();
            }
            if !p.is_zero() {
                out += &(p * &dj);
            }
        }
        out
    }

    /// The formal adjoint `sum_{j,i} (-1)^{j+i} C(j+i,i) (d^i P_{j+i}) d^j`.
    pub fn adjoint(&self) -> Self {
        let k = self.coeffs.len();
        let mut out = vec![self.alg.zero(); k];
        for (jj, p) in self.coeffs.iter().enumerate() {
            // contribution of P_jj d^jj to each power j = jj - i
            let mut dp = p.clone();
            for i in 0..=jj {
                if i > 0 {
                    dp = dp.total_derivative();
                }
                let j = jj - i;
                let mut c = binomial_rational(jj as i64, i as i64);
                if jj % 2 == 1 {
                    c = -c;
                }
                out[j] += &dp.scale(&c);
            }
        }
        let mut r = Self { alg: self.alg, coeffs: out };
        r.trim();
        r
    }

    /// Composition `self o other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out: Vec<SuperPolynomial> = Vec::new();
        for (a, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (b, q) in other.coeffs.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                // P d^a (Q d^b) = P sum_i C(a,i) (d^i Q) d^{a-i+b}
                let mut dq = q.clone();
                for i in 0..=a {
                    if i > 0 {
                        dq = dq.total_derivative();
                    }
                    let pw = a - i + b;
                    if out.len() <= pw {
                        out.resize(pw + 1, self.alg.zero());
                    }
                    out[pw] += &(p * &dq).scale(&binomial_rational(a as i64, i as i64));
                }
            }
        }
        let mut r = Self { alg: self.alg, coeffs: out };
        r.trim();
        r
    }

    pub fn scale(&self, c: &crate::Rational) -> Self {
        let mut r = Self { alg: self.alg, coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect() };
        r.trim();
        r
    }
}

impl std::ops::Add<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|j| &self.coeff(j) + &rhs.coeff(j)).collect();
        let mut r = DiffOperator { alg: self.alg, coeffs };
        r.trim();
        r
    }
}

impl std::ops::Sub<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        self + &rhs.scale(&-crate::Rational::one())
    }
}

impl std::ops::Neg for &DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        self.scale(&-crate::Rational::one())
    }
}

impl fmt::Display for DiffOperator {
    /// Surface form `P_0 + P_1*del + P_2*del^2 ...`, compound coefficients parenthesised.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let del = match j {
                0 => String::new(),
                1 => "del".to_string(),
                _ => format!("del^{j}"),
            };
            let (neg, body) = coefficient_body(p);
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            match (body.as_str(), j) {
                (b, 0) => write!(f, "{b}")?,
                ("1", _) => write!(f, "{del}")?,
                (b, _) => write!(f, "{b}*{del}")?,
            }
        }
        Ok(())
    }
}

/// Split a coefficient into a sign and a printable factor.
fn coefficient_body(p: &SuperPolynomial) -> (bool, String) {
    if p.len() == 1 {
        let s = p.to_string();
        if let Some(rest) = s.strip_prefix('-') {
            return (true, rest.to_string());
        }
        return (false, s);
    }
    (false, format!("({p})"))
}

impl Zero for DiffOperator {
    fn zero() -> Self {
        DiffOperator::zero(Algebra::SCALAR)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl std::ops::Add for DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: DiffOperator) -> DiffOperator {
        &self + &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    const A: Algebra = Algebra::SCALAR;

    fn q_op() -> DiffOperator {
        DiffOperator::new(A, vec![A.u(1).scale(&rat(1, 2)), A.u(0)]).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let d = DiffOperator::del_power(A, 1);
        assert_eq!(d.adjoint(), -&d);
        let d3 = DiffOperator::del_power(A, 3);
        assert_eq!(d3.adjoint(), -&d3);
    }

    #[test]
    fn adjoint_of_q_by_termwise_expansion() {
        // (u d)* = -d o u = -u d - u_1 ; (u_1/2)* = u_1/2 ; sum = -(u d + u_1/2)
        let q = q_op();
        let termwise = &(-&DiffOperator::del_power(A, 1).compose(&DiffOperator::multiplication(A.u(0)).unwrap()))
            + &DiffOperator::multiplication(A.u(1).scale(&rat(1, 2))).unwrap();
        assert_eq!(q.adjoint(), termwise);
        assert_eq!(q.adjoint(), -&q);
    }

    #[test]
    fn odd_coefficients_rejected() {
        assert_eq!(DiffOperator::new(A, vec![A.theta(0)]).unwrap_err(), Error::OddCoefficient);
    }

    #[test]
    fn display() {
        assert_eq!(q_op().to_string(), "1/2*u_1 + u*del");
        let op = DiffOperator::new(A, vec![A.zero(), A.zero(), &A.u(0) + &A.u(1)]).unwrap();
        assert_eq!(op.to_string(), "(u + u_1)*del^2");
    }
}
