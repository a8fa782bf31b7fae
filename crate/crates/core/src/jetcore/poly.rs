use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::monomial::{Coordinate, JetCoordinate, Monomial, OddCoordinate};
use crate::error::{Error, Result};
use crate::Rational;

/// The ambient algebra: number of dependent variables and whether `u_1` may
/// be inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Algebra {
    pub q: u16,
    pub hat: bool,
}

impl Algebra {
    /// Single-component polynomial algebra.
    pub const SCALAR: Algebra = Algebra { q: 1, hat: false };
    /// Single-component algebra with `u_1` inverted.
    pub const HAT: Algebra = Algebra { q: 1, hat: true };

    pub fn new(q: u16, hat: bool) -> Result<Self> {
        if q == 0 {
            return Err(Error::BadIndex("q must be at least 1".into()));
        }
        if hat && q != 1 {
            return Err(Error::Unsupported("hat mode requires q = 1".into()));
        }
        Ok(Self { q, hat })
    }

    pub fn zero(self) -> SuperPolynomial {
        SuperPolynomial { alg: self, terms: BTreeMap::new() }
    }

    pub fn one(self) -> SuperPolynomial {
        self.constant(Rational::one())
    }

    pub fn constant(self, c: Rational) -> SuperPolynomial {
        self.term(c, Monomial::one())
    }

    pub fn int(self, n: i64) -> SuperPolynomial {
        self.constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(self, n: i64, d: i64) -> SuperPolynomial {
        self.constant(crate::rat(n, d))
    }

    /// `u_k` (single component).
    pub fn u(self, k: u16) -> SuperPolynomial {
        self.jet(JetCoordinate::u(k), 1)
    }

    /// `u^alpha_k`.
    pub fn u_alpha(self, alpha: u16, k: u16) -> SuperPolynomial {
        self.jet(JetCoordinate::new(alpha, k), 1)
    }

    /// `theta_k` (single component).
    pub fn theta(self, k: u16) -> SuperPolynomial {
        self.theta_alpha(1, k)
    }

    pub fn theta_alpha(self, alpha: u16, k: u16) -> SuperPolynomial {
        assert!(alpha >= 1 && alpha <= self.q, "theta index out of range");
        self.term(Rational::one(), Monomial::odd(OddCoordinate::new(alpha, k)))
    }

    /// `v^e`; panics on an exponent the algebra does not admit.
    pub fn jet(self, v: JetCoordinate, e: i32) -> SuperPolynomial {
        self.try_jet(v, e).expect("invalid jet power")
    }

    pub fn try_jet(self, v: JetCoordinate, e: i32) -> Result<SuperPolynomial> {
        let m = Monomial::jet(v, e);
        self.check_monomial(&m)?;
        Ok(self.term(Rational::one(), m))
    }

    pub fn term(self, c: Rational, m: Monomial) -> SuperPolynomial {
        let mut p = self.zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.max_alpha() > self.q {
            return Err(Error::BadIndex(format!("component index exceeds q = {}", self.q)));
        }
        let allowed = if self.hat { Some(JetCoordinate::u(1)) } else { None };
        if let Some(v) = m.has_negative_exponent_outside(allowed) {
            return Err(Error::NegativePower(v.to_string()));
        }
        Ok(())
    }

    pub fn compatible(&self, other: &Algebra) -> Result<()> {
        if self != other {
            return Err(Error::IncompatibleAlgebra(format!(
                "(q={}, hat={}) vs (q={}, hat={})",
                self.q, self.hat, other.q, other.hat
            )));
        }
        Ok(())
    }
}

/// An element of the jet superalgebra: a finite exact-rational combination
/// of monomials in `u^alpha_k` and `theta_{alpha,k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SuperPolynomial {
    alg: Algebra,
    terms: BTreeMap<Monomial, Rational>,
}

/// Homogeneity data reported by [`SuperPolynomial::grading_info`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradingInfo {
    /// `None` when the terms have different homogeneity degrees.
    pub degree: Option<i64>,
    /// `None` when the terms have different numbers of odd generators.
    pub theta_degree: Option<usize>,
    pub order: u16,
}

impl SuperPolynomial {
    pub fn algebra(&self) -> Algebra {
        self.alg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Build from monomial/coefficient pairs, validating every monomial.
    pub fn from_terms(
        alg: Algebra,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Result<Self> {
        let mut p = alg.zero();
        for (m, c) in terms {
            alg.check_monomial(&m)?;
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Same terms, reinterpreted in the hat algebra.
    pub fn to_hat(&self) -> Result<SuperPolynomial> {
        let alg = Algebra::new(self.alg.q, true)?;
        Ok(SuperPolynomial { alg, terms: self.terms.clone() })
    }

    /// Move into the polynomial algebra; fails if a `u_1^-1` is present.
    pub fn to_polynomial(&self) -> Result<SuperPolynomial> {
        let alg = Algebra { q: self.alg.q, hat: false };
        for m in self.terms.keys() {
            alg.check_monomial(m)?;
        }
        Ok(SuperPolynomial { alg, terms: self.terms.clone() })
    }

    pub fn scale(&self, c: &Rational) -> SuperPolynomial {
        if c.is_zero() {
            return self.alg.zero();
        }
        SuperPolynomial {
            alg: self.alg,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> SuperPolynomial {
        self.scale(&Rational::from_integer(BigInt::from(n)))
    }

    pub fn try_add(&self, other: &SuperPolynomial) -> Result<SuperPolynomial> {
        self.alg.compatible(&other.alg)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    /// Graded-commutative product with Koszul signs.
    pub fn superproduct(&self, other: &SuperPolynomial) -> Result<SuperPolynomial> {
        self.alg.compatible(&other.alg)?;
        let mut r = self.alg.zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, s)) = ma.mul(mb) {
                    let c = ca * cb;
                    r.add_term(m, if s < 0 { -c } else { c });
                }
            }
        }
        Ok(r)
    }

    pub fn pow(&self, n: u32) -> SuperPolynomial {
        let mut r = self.alg.one();
        for _ in 0..n {
            r = &r * self;
        }
        r
    }

    pub fn grading_info(&self) -> Result<GradingInfo> {
        if self.is_zero() {
            return Err(Error::UndefinedGrading);
        }
        let mut degs = self.terms.keys().map(|m| m.degree());
        let d0 = degs.next().unwrap();
        let degree = if degs.all(|d| d == d0) { Some(d0) } else { None };
        let mut ths = self.terms.keys().map(|m| m.theta_degree());
        let t0 = ths.next().unwrap();
        let theta_degree = if ths.all(|t| t == t0) { Some(t0) } else { None };
        Ok(GradingInfo { degree, theta_degree, order: self.order().unwrap_or(0) })
    }

    /// Highest jet index present, `None` for constants.
    pub fn order(&self) -> Option<u16> {
        self.terms.keys().filter_map(|m| m.order()).max()
    }

    /// Uniform theta-degree; zero counts as degree `k` for any `k`, reported as `Some(0)`.
    pub fn theta_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|m| m.theta_degree());
        match it.next() {
            None => Some(0),
            Some(t) => it.all(|s| s == t).then_some(t),
        }
    }

    pub fn is_theta_free(&self) -> bool {
        self.terms.keys().all(|m| m.theta_degree() == 0)
    }

    pub fn has_theta_degree(&self, k: usize) -> bool {
        self.terms.keys().all(|m| m.theta_degree() == k)
    }

    /// Largest total degree in the order-zero variables.
    pub fn max_udeg(&self) -> i32 {
        self.terms.keys().map(|m| m.udeg()).max().unwrap_or(0)
    }

    /// Split into homogeneous components keyed by degree.
    pub fn degree_components(&self) -> BTreeMap<i64, SuperPolynomial> {
        let mut out: BTreeMap<i64, SuperPolynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| self.alg.zero())
                .add_term(m.clone(), c.clone());
        }
        out
    }

    /// Split by the exponent of `v`: `self = sum_e v^e * part[e]`, parts free of `v`.
    pub fn split_by_exponent(&self, v: JetCoordinate) -> BTreeMap<i32, SuperPolynomial> {
        let mut out: BTreeMap<i32, SuperPolynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            out.entry(e)
                .or_insert_with(|| self.alg.zero())
                .add_term(m.with_exponent_shift(v, -e), c.clone());
        }
        out
    }

    /// Does any term involve the given coordinate?
    pub fn depends_on(&self, v: Coordinate) -> bool {
        self.terms.keys().any(|m| match v {
            Coordinate::Even(j) => m.exponent(j) != 0,
            Coordinate::Odd(t) => m.contains_odd(t),
        })
    }

    /// Does any term involve a coordinate of order at least `n`?
    pub fn depends_on_order_at_least(&self, n: u16) -> bool {
        self.terms.keys().any(|m| m.order().is_some_and(|k| k >= n))
    }

    pub fn partial_derivative(&self, v: Coordinate) -> SuperPolynomial {
        match v {
            Coordinate::Even(j) => self.partial_u(j),
            Coordinate::Odd(t) => self.partial_theta(t),
        }
    }

    /// Ordinary partial derivative in an even coordinate (Laurent-aware).
    pub fn partial_u(&self, v: JetCoordinate) -> SuperPolynomial {
        let mut r = self.alg.zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e != 0 {
                r.add_term(m.with_exponent_shift(v, -1), c * Rational::from_integer(e.into()));
            }
        }
        r
    }

    /// Left graded derivation with `d/dtheta_{a,k} theta_{b,l} = delta`.
    pub fn partial_theta(&self, t: OddCoordinate) -> SuperPolynomial {
        let mut r = self.alg.zero();
        for (m, c) in &self.terms {
            if let Some(idx) = m.odd_position(t) {
                let (mm, s) = m.remove_odd_at(idx);
                r.add_term(mm, if s < 0 { -c.clone() } else { c.clone() });
            }
        }
        r
    }

    /// The total x-derivative extended to odd generators.
    pub fn total_derivative(&self) -> SuperPolynomial {
        let mut r = self.alg.zero();
        for (m, c) in &self.terms {
            for &(v, e) in m.even() {
                let mm = m.with_exponent_shift(v, -1).with_exponent_shift(v.next(), 1);
                r.add_term(mm, c * Rational::from_integer(e.into()));
            }
            for idx in 0..m.theta_degree() {
                if let Some(mm) = m.raise_odd_at(idx) {
                    r.add_term(mm, c.clone());
                }
            }
        }
        r
    }

    pub fn total_derivative_n(&self, n: usize) -> SuperPolynomial {
        let mut r = self.clone();
        for _ in 0..n {
            if r.is_zero() {
                break;
            }
            r = r.total_derivative();
        }
        r
    }

    /// Antiderivative in a single even coordinate; fails on `v^-1`.
    pub fn integrate_in(&self, v: JetCoordinate) -> Result<SuperPolynomial> {
        let mut r = self.alg.zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == -1 {
                return Err(Error::Antiderivative(format!("integrand contains {v}^-1")));
            }
            r.add_term(m.with_exponent_shift(v, 1), c / Rational::from_integer((e + 1).into()));
        }
        Ok(r)
    }

    /// Keep only terms satisfying the predicate.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Monomial) -> bool) -> SuperPolynomial {
        SuperPolynomial {
            alg: self.alg,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// If `self` is a constant, its value.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }
}

fn write_coefficient_term(f: &mut fmt::Formatter<'_>, c: &Rational, m: &Monomial) -> fmt::Result {
    if m.is_one() {
        write!(f, "{c}")
    } else if c.is_one() {
        write!(f, "{m}")
    } else {
        write!(f, "{c}*{m}")
    }
}

impl fmt::Display for SuperPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if c.is_negative() {
                write!(f, "{}", if i == 0 { "-" } else { " - " })?;
            } else if i > 0 {
                write!(f, " + ")?;
            }
            write_coefficient_term(f, &c.abs(), m)?;
        }
        Ok(())
    }
}

impl Neg for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn neg(self) -> SuperPolynomial {
        SuperPolynomial {
            alg: self.alg,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for SuperPolynomial {
    type Output = SuperPolynomial;
    fn neg(mut self) -> SuperPolynomial {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

// Operator impls panic on mismatched algebras; the fallible forms are
// `try_add` and `superproduct`.
impl AddAssign<&SuperPolynomial> for SuperPolynomial {
    fn add_assign(&mut self, rhs: &SuperPolynomial) {
        self.alg.compatible(&rhs.alg).expect("adding polynomials from different algebras");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&SuperPolynomial> for SuperPolynomial {
    fn sub_assign(&mut self, rhs: &SuperPolynomial) {
        self.alg.compatible(&rhs.alg).expect("subtracting polynomials from different algebras");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&SuperPolynomial> for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn add(self, rhs: &SuperPolynomial) -> SuperPolynomial {
        let mut r = self.clone();
        r += rhs;
        r
    }
}

impl Sub<&SuperPolynomial> for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn sub(self, rhs: &SuperPolynomial) -> SuperPolynomial {
        let mut r = self.clone();
        r -= rhs;
        r
    }
}

impl Add for SuperPolynomial {
    type Output = SuperPolynomial;
    fn add(mut self, rhs: SuperPolynomial) -> SuperPolynomial {
        self += &rhs;
        self
    }
}

impl Sub for SuperPolynomial {
    type Output = SuperPolynomial;
    fn sub(mut self, rhs: SuperPolynomial) -> SuperPolynomial {
        self -= &rhs;
        self
    }
}

impl Mul<&SuperPolynomial> for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn mul(self, rhs: &SuperPolynomial) -> SuperPolynomial {
        self.superproduct(rhs).expect("multiplying polynomials from different algebras")
    }
}

impl Mul for SuperPolynomial {
    type Output = SuperPolynomial;
    fn mul(self, rhs: SuperPolynomial) -> SuperPolynomial {
        &self * &rhs
    }
}
