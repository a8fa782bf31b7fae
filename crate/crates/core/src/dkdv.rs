//! The bihamiltonian structure `(d, u d + u_1/2)` of the dispersionless KdV
//! hierarchy: its hierarchy, symmetries, the cocycle equations for
//! infinitesimal deformations and their quasi-trivialization.

use num_traits::{One, Zero};

use crate::binomial::binomial_rational;
use crate::deform::{primitive_solve, Cochain, GradedSlice};
use crate::error::{Error, Result};
use crate::jetcore::{Algebra, JetCoordinate, SuperPolynomial};
use crate::linalg::kernel_of_combination;
use crate::schouten::{d_h, Pencil};
use crate::variational::{delta_theta, delta_u, integrate_x, normalize, EvolutionaryVF, MultiVector};
use crate::{rat, Rational};

fn u_at(k: u16) -> JetCoordinate {
    JetCoordinate::u(k)
}

/// `P = 1/2 int theta theta_1`.
pub fn p_bivector(alg: Algebra) -> MultiVector {
    MultiVector::from_density(&(&alg.theta(0) * &alg.theta(1)).scale(&rat(1, 2))).expect("bivector")
}

/// `Q = 1/2 int u theta theta_1`.
pub fn q_bivector(alg: Algebra) -> MultiVector {
    MultiVector::from_density(&(&(&alg.u(0) * &alg.theta(0)) * &alg.theta(1)).scale(&rat(1, 2))).expect("bivector")
}

/// The certified pencil `(P, Q)`.
pub fn dkdv_pencil() -> Pencil {
    Pencil::new(p_bivector(Algebra::SCALAR), q_bivector(Algebra::SCALAR)).expect("dispersionless KdV pencil")
}

/// The same pencil over the hat algebra.
pub fn dkdv_pencil_hat() -> Pencil {
    Pencil::new(p_bivector(Algebra::HAT), q_bivector(Algebra::HAT)).expect("dispersionless KdV pencil")
}

/// `(u d + u_1/2) w`.
pub fn q_apply(w: &SuperPolynomial) -> SuperPolynomial {
    let alg = w.algebra();
    &(&alg.u(0) * &w.total_derivative()) + &(&alg.u(1) * w).scale(&rat(1, 2))
}

/// Density `h` with `delta_u h = w`, by the homotopy formula. Fails if `w`
/// is not a variational derivative.
pub fn variational_lift(w: &SuperPolynomial) -> Result<SuperPolynomial> {
    let alg = w.algebra();
    let mut h = alg.zero();
    for (m, c) in w.terms() {
        let d: i32 = m.even().iter().map(|(_, e)| *e).sum();
        if d + 1 == 0 {
            return Err(Error::NotExact);
        }
        h += &(&alg.u(0) * &alg.term(c / Rational::from_integer((d + 1).into()), m.clone()));
    }
    if delta_u(&h, 1) != *w {
        return Err(Error::NotExact);
    }
    Ok(h)
}

/// The functionals `H_{-1}, H_0, ..., H_N` with `P delta H_n = Q delta H_{n-1}`.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    densities: Vec<SuperPolynomial>,
}

impl Hierarchy {
    /// Density of `H_n`, `n >= -1`.
    pub fn density(&self, n: i64) -> &SuperPolynomial {
        &self.densities[(n + 1) as usize]
    }

    pub fn functional(&self, n: i64) -> MultiVector {
        MultiVector::from_density(self.density(n)).expect("theta-free density")
    }

    /// Largest index `N`.
    pub fn top(&self) -> i64 {
        self.densities.len() as i64 - 2
    }

    /// The flow `u_t = d delta_u H_n`.
    pub fn flow(&self, n: i64) -> EvolutionaryVF {
        EvolutionaryVF::scalar(delta_u(self.density(n), 1).total_derivative()).expect("theta-free")
    }
}

/// Generate the hierarchy from the Casimir `H_{-1} = 4/3 int u`.
pub fn hierarchy(n: usize) -> Result<Hierarchy> {
    let alg = Algebra::SCALAR;
    let mut densities = vec![alg.u(0).scale(&rat(4, 3))];
    for _ in 0..=n {
        let prev = densities.last().unwrap();
        let rhs = q_apply(&delta_u(prev, 1));
        let grad = integrate_x(&rhs)?;
        densities.push(variational_lift(&grad)?);
    }
    Ok(Hierarchy { densities })
}

/// `d_P Z = 0` and `d_Q Z = 0`.
pub fn symmetry_check(z: &EvolutionaryVF) -> Result<bool> {
    let pencil = if z.algebra().hat { dkdv_pencil_hat() } else { dkdv_pencil() };
    let x = z.to_multivector();
    Ok(d_h(pencil.p(), &x)?.is_zero() && d_h(pencil.q(), &x)?.is_zero())
}

/// Characteristics of degree `ell` in the slice bounds whose vector fields
/// are killed by both `d_P` and `d_Q`.
pub fn symmetry_space(ell: i64, slice: &GradedSlice) -> Result<Vec<SuperPolynomial>> {
    let alg = Algebra::SCALAR;
    let pencil = dkdv_pencil();
    let s = slice.with_target(1, ell);
    let basis = s.basis(alg);
    let mut images = Vec::with_capacity(basis.len());
    for b in &basis {
        let x = MultiVector::from_density_with_degree(b, 1)?;
        images.push(vec![d_h(pencil.p(), &x)?.rep().clone(), d_h(pencil.q(), &x)?.rep().clone()]);
    }
    let chars: Vec<SuperPolynomial> = basis.iter().map(|b| delta_theta(b, 1)).collect();
    Ok(kernel_of_combination(&images)
        .into_iter()
        .map(|k| crate::linalg::combine(&chars, &k, alg.zero()))
        .collect())
}

/// The coefficient data `e_j`, `S_k` and (for even `n`) `E_l` of a pair `(f, g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleData {
    pub n: usize,
    pub e: Vec<SuperPolynomial>,
    pub s: Vec<SuperPolynomial>,
    pub big_e: Option<Vec<SuperPolynomial>>,
}

/// `S_k = e_k + sum_{j >= k} (-1)^j C(j+1, k+1) d^{j-k} e_j`.
pub fn s_from_e(e: &[SuperPolynomial]) -> Vec<SuperPolynomial> {
    let n = e.len();
    (0..n)
        .map(|k| {
            let mut s = e[k].clone();
            for (j, ej) in e.iter().enumerate().skip(k) {
                let mut c = binomial_rational(j as i64 + 1, k as i64 + 1);
                if j % 2 == 1 {
                    c = -c;
                }
                s += &ej.total_derivative_n(j - k).scale(&c);
            }
            s
        })
        .collect()
}

/// `E_l = sum_{j=2l}^{m+l} (-1)^j C(2m-j, m-l) C(j+1, 2l+1) d^{j-2l} e_j` for `n = 2m`.
pub fn big_e_from_e(e: &[SuperPolynomial]) -> Result<Vec<SuperPolynomial>> {
    let n = e.len() - 1;
    if n % 2 == 1 {
        return Err(Error::Unsupported("E is only defined for even n".into()));
    }
    let m = n / 2;
    let alg = e[0].algebra();
    Ok((0..=m)
        .map(|l| {
            let mut acc = alg.zero();
            for j in 2 * l..=m + l {
                let mut c = binomial_rational((2 * m - j) as i64, (m - l) as i64)
                    * binomial_rational(j as i64 + 1, 2 * l as i64 + 1);
                if j % 2 == 1 {
                    c = -c;
                }
                acc += &e[j].total_derivative_n(j - 2 * l).scale(&c);
            }
            acc
        })
        .collect())
}

/// `F_k - G_k` for `0 <= k <= n`.
pub fn e_coefficients(f: &SuperPolynomial, g: &SuperPolynomial, n: usize) -> Vec<SuperPolynomial> {
    let alg = f.algebra();
    (0..=n)
            .map(|k| {
                let mut gk = alg.zero();
                for l in 0..=(n - k) {
                    let c = (binomial_rational((k + l) as i64, l as i64)
                        + binomial_rational((k + l + 1) as i64, l as i64))
                        * rat(1, 2);
                    let d = g.partial_u(u_at((k + l) as u16));
                    if !d.is_zero() {
                        gk += &(&alg.u(l as u16) * &d).scale(&c);
                    }
                }
                if k == 0 {
                    gk -= &g.scale(&rat(1, 2));
                }
                &f.partial_u(u_at(k as u16)) - &gk
            })
            .collect()
}

/// The `e`, `S` and `E` data of `(f, g)` viewed in `A[n]`.
pub fn build_ese(f: &SuperPolynomial, g: &SuperPolynomial, n: usize) -> Result<CocycleData> {
    f.algebra().compatible(&g.algebra())?;
    let top = f.order().unwrap_or(0).max(g.order().unwrap_or(0)) as usize;
    if top > n {
        return Err(Error::Precondition(format!("data has order {top} > {n}")));
    }
    let e = e_coefficients(f, g, n);
    let s = s_from_e(&e);
    let big_e = if n % 2 == 0 { Some(big_e_from_e(&e)?) } else { None };
    Ok(CocycleData { n, e, s, big_e })
}

/// Check `S_k = sum_l C(2l+1,k+1)/C(2m-k-1,m-l) d^{2l-k} E_l` for `k < n` and
/// `S_n = 2 E_m`, for arbitrary data `e_0, ..., e_n`.
pub fn verify_se_equivalence(e: &[SuperPolynomial]) -> Result<bool> {
    let n = e.len() - 1;
    let m = n / 2;
    let s = s_from_e(e);
    let big = big_e_from_e(e)?;
    let alg = e[0].algebra();
    for k in 0..=n {
        let rhs = if k == n {
            big[m].scale(&rat(2, 1))
        } else {
            let mut acc = alg.zero();
            for (l, el) in big.iter().enumerate() {
                let num = binomial_rational(2 * l as i64 + 1, k as i64 + 1);
                if num.is_zero() {
                    continue;
                }
                let den = binomial_rational((2 * m - k - 1) as i64, (m - l) as i64);
                if den.is_zero() {
                    return Ok(false);
                }
                acc += &el.total_derivative_n(2 * l - k).scale(&(num / den));
            }
            acc
        };
        if rhs != s[k] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `sum_p C(a+1, b-2p) C(a+p, p) = C(a+b, b)`.
pub fn binomial_identity_check(a: i64, b: i64) -> bool {
    let lhs = (0..=b / 2).fold(Rational::zero(), |acc, p| {
        acc + binomial_rational(a + 1, b - 2 * p) * binomial_rational(a + p, p)
    });
    lhs == binomial_rational(a + b, b)
}

/// Characteristics `(f, g)` with `d_P int f theta = d_Q int g theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct CocyclePair {
    pub f: SuperPolynomial,
    pub g: SuperPolynomial,
}

fn order_of(p: &SuperPolynomial) -> usize {
    p.order().unwrap_or(0) as usize
}

fn in_order(p: &SuperPolynomial, k: usize) -> bool {
    p.is_zero() || order_of(p) <= k
}

impl CocyclePair {
    /// Checks the cocycle equation; data is moved to the hat algebra.
    pub fn new(f: SuperPolynomial, g: SuperPolynomial) -> Result<Self> {
        let pair = Self { f: f.to_hat()?, g: g.to_hat()? };
        if !pair.f.is_theta_free() || !pair.g.is_theta_free() {
            return Err(Error::OddCoefficient);
        }
        if !pair.s_system_vanishes() {
            return Err(Error::NotCocycle("S-system does not vanish".into()));
        }
        Ok(pair)
    }

    /// Highest jet order in `f` and `g`.
    pub fn order(&self) -> usize {
        order_of(&self.f).max(order_of(&self.g))
    }

    pub fn s_system_vanishes(&self) -> bool {
        let n = self.order();
        s_from_e(&e_coefficients(&self.f, &self.g, n)).iter().all(|s| s.is_zero())
    }

    /// `f += d delta a + Q delta b`, `g += -d delta b + Q delta c`.
    pub fn modify(&mut self, a: &SuperPolynomial, b: &SuperPolynomial, c: &SuperPolynomial) {
        let db = delta_u(b, 1);
        self.f = &(&self.f + &delta_u(a, 1).total_derivative()) + &q_apply(&db);
        self.g = &(&self.g - &db.total_derivative()) + &q_apply(&delta_u(c, 1));
    }

    /// The pair of the coboundary with densities `a, b, c`.
    pub fn coboundary(a: &SuperPolynomial, b: &SuperPolynomial, c: &SuperPolynomial) -> Self {
        let mut pair = Self { f: Algebra::HAT.zero(), g: Algebra::HAT.zero() };
        pair.modify(&a.to_hat().expect("hat"), &b.to_hat().expect("hat"), &c.to_hat().expect("hat"));
        pair
    }

    /// The cocycle `d_P int g theta`.
    pub fn cocycle(&self) -> Result<MultiVector> {
        let x = MultiVector::from_density_with_degree(&(&self.g * &self.g.algebra().theta(0)), 1)?;
        d_h(&p_bivector(Algebra::HAT), &x)
    }
}

/// Densities `a, b, c` accumulated by a reduction, acting as
/// `f -> f + d delta a + Q delta b` and `g -> g - d delta b + Q delta c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Modification {
    pub a: SuperPolynomial,
    pub b: SuperPolynomial,
    pub c: SuperPolynomial,
}

impl Modification {
    pub fn zero() -> Self {
        let z = Algebra::HAT.zero();
        Self { a: z.clone(), b: z.clone(), c: z }
    }

    fn apply(&mut self, pair: &mut CocyclePair, a: &SuperPolynomial, b: &SuperPolynomial, c: &SuperPolynomial) {
        pair.modify(a, b, c);
        self.a += a;
        self.b += b;
        self.c += c;
    }
}

/// Solve `d^2/du_k^2 h = rhs` with zero integration constants.
fn double_antiderivative(rhs: &SuperPolynomial, k: u16) -> Result<SuperPolynomial> {
    let v = u_at(k);
    rhs.integrate_in(v)
        .and_then(|x| x.integrate_in(v))
        .map_err(|e| Error::Antiderivative(format!("{e} while integrating twice in {v}")))
}

fn sign(m: usize) -> Rational {
    if m % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Internal(what.into()))
    }
}

/// Remove the order-`n` dependence of `g` (and hence `f`).
fn remove_top_even(pair: &mut CocyclePair, acc: &mut Modification, n: usize) -> Result<()> {
    let m = n / 2;
    let alg = Algebra::HAT;
    let top = u_at(n as u16);
    let e_n = (&pair.f - &(&alg.u(0) * &pair.g)).partial_u(top);
    check(e_n.is_zero(), "e_n does not vanish")?;
    let g0 = pair.g.partial_u(top);
    if g0.is_zero() {
        return Ok(());
    }
    check(g0.partial_u(top).is_zero() && in_order(&g0, m), "g is not of the form u_n g_0 + g_1 with g_0 in A[m]")?;
    let coeff = sign(m) * (Rational::from_integer((m as i64).into()) + rat(1, 2));
    let rhs = (&g0 * &alg.jet(u_at(1), -1)).scale(&(Rational::one() / coeff));
    let h = double_antiderivative(&rhs, m as u16)?;
    let u = alg.u(0);
    let a = -&(&u.pow(2) * &h);
    let b = &u * &h;
    acc.apply(pair, &a, &b, &h);
    check(in_order(&pair.f, n - 1) && in_order(&pair.g, n - 1), "order n survived the even step")
}

/// Make `f - u g` free of `u_{n-1}`.
fn remove_odd_difference(pair: &mut CocyclePair, acc: &mut Modification, n: usize) -> Result<()> {
    let m = n / 2;
    let alg = Algebra::HAT;
    let v = u_at(n as u16 - 1);
    let e = (&pair.f - &(&alg.u(0) * &pair.g)).partial_u(v);
    if e.is_zero() {
        return Ok(());
    }
    check(e.partial_u(v).is_zero(), "second u_{n-1} derivative of f - u g does not vanish")?;
    check(in_order(&e, m - 1), "e_{n-1} is not in A[m-1]")?;
    let h = double_antiderivative(&e.scale(&sign(m)), m as u16 - 1)?;
    let z = alg.zero();
    acc.apply(pair, &h, &z, &z);
    let diff = &pair.f - &(&alg.u(0) * &pair.g);
    check(in_order(&diff, n - 2), "f - u g kept order n-1")
}

/// Make `g` free of `u_{n-1}`, then clean up `f - u g` again.
fn remove_top_odd(pair: &mut CocyclePair, acc: &mut Modification, n: usize) -> Result<()> {
    let m = n / 2;
    let alg = Algebra::HAT;
    let v = u_at(n as u16 - 1);
    let g0 = pair.g.partial_u(v);
    if !g0.is_zero() {
        check(g0.partial_u(v).is_zero() && in_order(&g0, m - 1), "g is not of the form u_{n-1} g_0 + g_1 with g_0 in A[m-1]")?;
        let h = double_antiderivative(&g0.scale(&sign(m)), m as u16 - 1)?;
        let z = alg.zero();
        acc.apply(pair, &z, &(-&h), &z);
    }
    remove_odd_difference(pair, acc, n)?;
    check(in_order(&pair.f, n - 2) && in_order(&pair.g, n - 2), "order n-1 survived the odd step")
}

/// Result of one reduction step.
#[derive(Clone, Debug)]
pub struct QuasiStep {
    pub modification: Modification,
    pub pair: CocyclePair,
}

/// Lower the order of a cocycle pair in `A^[n]`, `n = 2m >= 4`, to `n - 2`
/// by adding coboundaries; odd orders are treated in the next even order.
pub fn quasi_step(pair: &CocyclePair, n: usize) -> Result<QuasiStep> {
    let n = n + n % 2;
    if n < 4 {
        return Err(Error::Precondition("quasi_step needs n >= 4".into()));
    }
    if pair.order() > n {
        return Err(Error::Precondition(format!("pair has order {} > {n}", pair.order())));
    }
    if !pair.s_system_vanishes() {
        return Err(Error::NotCocycle("S-system does not vanish".into()));
    }
    let mut p = pair.clone();
    let mut acc = Modification::zero();
    remove_top_even(&mut p, &mut acc, n)?;
    remove_odd_difference(&mut p, &mut acc, n)?;
    remove_top_odd(&mut p, &mut acc, n)?;
    check(p.s_system_vanishes(), "output S-system does not vanish")?;
    Ok(QuasiStep { modification: acc, pair: p })
}

/// A quasi-triviality witness: `b_0` in the hat algebra with `d_P b_0 = 0`
/// and `d_Q b_0 = c_1`.
#[derive(Clone, Debug)]
pub struct QuasiWitness {
    pub b0: MultiVector,
    pub vector_field: EvolutionaryVF,
}

/// Outcome of [`quasi_trivialize`].
#[derive(Clone, Debug)]
pub enum QuasiTriviality {
    Trivialized(QuasiWitness),
    NontrivialAtDegreeZero,
}

fn witness(b0: MultiVector, c1: &MultiVector) -> Result<QuasiTriviality> {
    let pencil = dkdv_pencil_hat();
    let c1 = c1.to_hat()?;
    let b0 = if b0.algebra().hat { b0 } else { b0.to_hat()? };
    check(d_h(pencil.p(), &b0)?.is_zero(), "witness is not d_P-closed")?;
    check(d_h(pencil.q(), &b0)? == c1, "witness does not reproduce c_1")?;
    let vector_field = EvolutionaryVF::from_multivector(&b0)?;
    Ok(QuasiTriviality::Trivialized(QuasiWitness { b0, vector_field }))
}

/// `d_P int (u_2/u_1) h dx`, the degree-2 witness.
pub fn degree_two_witness(h: &SuperPolynomial) -> Result<MultiVector> {
    let alg = Algebra::HAT;
    let h = h.to_hat()?;
    let dens = &(&alg.u(2) * &alg.jet(u_at(1), -1)) * &h;
    d_h(&p_bivector(alg), &MultiVector::from_density_with_degree(&dens, 0)?)
}

/// Find characteristics `(f, g)` with `d_P int g theta = c_1` and
/// `d_P int f theta = d_Q int g theta`.
pub fn pair_from_cocycle(c1: &MultiVector, slice: &GradedSlice) -> Result<CocyclePair> {
    let pencil = dkdv_pencil();
    let y = primitive_solve(c1, pencil.p(), slice)?;
    let g = delta_theta(y.rep(), 1);
    let rhs = d_h(pencil.q(), &y)?;
    let yf = primitive_solve(&rhs, pencil.p(), slice)?;
    let f = delta_theta(yf.rep(), 1);
    CocyclePair::new(f, g)
}

/// Quasi-trivialize a tail-form cocycle `(0, c_1)` homogeneous of degree `ell + 1`.
pub fn quasi_trivialize(c: &Cochain, ell: i64) -> Result<QuasiTriviality> {
    if c.bidegree() != 1 {
        return Err(Error::Precondition("expected a cochain (c_0, c_1)".into()));
    }
    if !c.is_tail_form() {
        return Err(Error::NotTailForm);
    }
    let c1 = c.entries()[1].clone();
    if c1.algebra() != Algebra::SCALAR {
        return Err(Error::Precondition("c_1 must be a polynomial bivector".into()));
    }
    if !c1.is_zero() && (c1.theta_degree() != 2 || c1.degree() != Some(ell + 1)) {
        return Err(Error::Precondition(format!("c_1 must be a bivector homogeneous of degree {}", ell + 1)));
    }
    let pencil = dkdv_pencil();
    if !d_h(pencil.p(), &c1)?.is_zero() || !d_h(pencil.q(), &c1)?.is_zero() {
        return Err(Error::NotCocycle("(0, c_1) is not closed".into()));
    }
    if ell < 0 {
        return Err(Error::Precondition("degree must be non-negative".into()));
    }
    let alg = Algebra::SCALAR;
    if ell == 0 {
        // (0, int theta theta_1) = d(-2 int theta); anything else is nontrivial
        let tt = MultiVector::from_density(&(&alg.theta(0) * &alg.theta(1)))?;
        let lambda = c1.rep().coefficient(tt.rep().terms().next().unwrap().0);
        if c1 != tt.scale(&lambda) {
            return Ok(QuasiTriviality::NontrivialAtDegreeZero);
        }
        let b0 = MultiVector::from_density(&alg.theta(0).scale(&(lambda * rat(-2, 1))))?;
        return witness(b0, &c1);
    }
    if c1.is_zero() {
        return witness(MultiVector::zero(Algebra::HAT, 1), &c1);
    }
    let slice = GradedSlice::bounds(ell.max(1) as u16, c1.rep().max_udeg() + 2);
    let mut pair = pair_from_cocycle(&c1, &slice)?;
    if ell == 2 {
        return degree_two_endgame(&pair, &c1);
    }
    let mut acc = Modification::zero();
    let mut n = pair.order() + pair.order() % 2;
    while n >= 4 {
        let step = quasi_step(&pair, n)?;
        acc.a += &step.modification.a;
        acc.b += &step.modification.b;
        acc.c += &step.modification.c;
        pair = step.pair;
        n -= 2;
    }
    if n == 2 {
        remove_top_even(&mut pair, &mut acc, 2)?;
        check(pair.s_system_vanishes(), "S-system does not vanish after the last step")?;
    }
    check(pair.cocycle()?.is_zero(), "reduced cocycle does not vanish")?;
    let b0 = d_h(&p_bivector(Algebra::HAT), &MultiVector::from_density_with_degree(&acc.c, 0)?)?;
    witness(b0, &c1)
}

/// `f = u g + u_1^2 p(u)` and `g = d(u_1 p(u))`; the witness is
/// `d_P int (u_2/u_1) h dx` with `h' = 2p/3`.
fn degree_two_endgame(pair: &CocyclePair, c1: &MultiVector) -> Result<QuasiTriviality> {
    let alg = Algebra::HAT;
    let r = &pair.f - &(&alg.u(0) * &pair.g);
    let p = &r * &alg.jet(u_at(1), -2);
    check(p.order().is_none_or(|o| o == 0) && p.terms().all(|(m, _)| m.exponent(u_at(1)) == 0), "f - u g is not u_1^2 p(u)")?;
    check((&alg.u(1) * &p).total_derivative() == pair.g, "g is not d(u_1 p)")?;
    let h = p.scale(&rat(2, 3)).integrate_in(u_at(0))?;
    witness(degree_two_witness(&h)?, c1)
}

/// `psi = -1/2 (u_3/u_1 - u_2^2/u_1^2)`.
pub fn psi() -> SuperPolynomial {
    let a = Algebra::HAT;
    let inv = |e| a.jet(u_at(1), e);
    (&(&a.u(3) * &inv(-1)) - &(&a.u(2).pow(2) * &inv(-2))).scale(&rat(-1, 2))
}

/// `D_t psi - u d psi - u_1 psi - source` with `D_t` the flow `u_t = u u_1`.
pub fn psi_residual(psi: &SuperPolynomial, source: &SuperPolynomial) -> SuperPolynomial {
    let a = Algebra::HAT;
    let dt = EvolutionaryVF::scalar(&a.u(0) * &a.u(1)).expect("theta-free");
    let mut r = dt.apply(psi);
    r -= &(&a.u(0) * &psi.total_derivative());
    r -= &(&a.u(1) * psi);
    r -= source;
    r
}

/// Whether `psi()` solves `D_t psi - u d psi - u_1 psi = u_3`. It does not:
/// the residual is `-2 u_3`, and the solution is [`psi_solution`].
pub fn psi_check() -> bool {
    psi_residual(&psi(), &Algebra::HAT.u(3)).is_zero()
}

/// `1/2 d^2 log u_1`, the solution of `D_t psi - u d psi - u_1 psi = u_3` in the hat algebra.
pub fn psi_solution() -> SuperPolynomial {
    -&psi()
}

/// `1/2 N` of a bivector density, as used to read off operators.
pub fn half_normal_form(a: &SuperPolynomial) -> SuperPolynomial {
    normalize(a).scale(&rat(1, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, DensityShape};
    use crate::schouten::poisson_bracket_functionals;
    use crate::variational::bivector_to_operator;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn hat() -> Algebra {
        Algebra::HAT
    }

    #[test]
    fn pencil_is_bihamiltonian() {
        let p = dkdv_pencil();
        assert!(crate::schouten::bracket(p.p(), p.q()).unwrap().is_zero());
        assert!(dkdv_pencil_hat().q().algebra().hat);
    }

    #[test]
    fn hierarchy_by_hand() {
        let h = hierarchy(3).unwrap();
        let a = Algebra::SCALAR;
        assert_eq!(*h.density(-1), a.u(0).scale(&rat(4, 3)));
        assert_eq!(*h.density(0), a.u(0).pow(2).scale(&rat(1, 3)));
        assert_eq!(*h.density(1), a.u(0).pow(3).scale(&rat(1, 6)));
        assert_eq!(*h.density(2), a.u(0).pow(4).scale(&rat(5, 48)));
        // delta H_3 from (u d + u_1/2)(5/12 u^3) = 35/24 u^3 u_1
        assert_eq!(*h.density(3), a.u(0).pow(5).scale(&rat(7, 96)));
        assert_eq!(h.top(), 3);
    }

    #[test]
    fn hierarchy_in_involution() {
        let h = hierarchy(3).unwrap();
        let p = bivector_to_operator(dkdv_pencil().p()).unwrap();
        for i in -1..=3 {
            for j in -1..=3 {
                let b = poisson_bracket_functionals(&p, &h.functional(i), &h.functional(j)).unwrap();
                assert!(b.is_zero(), "{{H_{i}, H_{j}}}");
                assert!(h.flow(i).commutator(&h.flow(j)).unwrap().characteristic()[0].is_zero());
            }
        }
    }

    #[test]
    fn lift_rejects_non_gradients() {
        let a = Algebra::SCALAR;
        assert!(variational_lift(&a.u(1)).is_err());
    }

    #[test]
    fn translation_and_scaling_flows_are_symmetries() {
        let a = Algebra::SCALAR;
        for d in 0..=5 {
            let z = EvolutionaryVF::scalar(&a.u(1) * &a.u(0).pow(d)).unwrap();
            assert!(symmetry_check(&z).unwrap(), "u_1 u^{d}");
        }
        let z = EvolutionaryVF::scalar(a.u(2)).unwrap();
        assert!(!symmetry_check(&z).unwrap());
    }

    #[test]
    fn no_symmetries_in_low_positive_degree() {
        let slice = GradedSlice::bounds(4, 4);
        for ell in 2..=3 {
            assert!(symmetry_space(ell, &slice).unwrap().is_empty(), "degree {ell}");
        }
        // degree 1 contains the hydrodynamic flows u^d u_1
        assert_eq!(symmetry_space(1, &slice).unwrap().len(), 5);
    }

    #[test]
    fn binomial_identity() {
        for a in 0..=12 {
            for b in 0..=12 {
                assert!(binomial_identity_check(a, b), "a={a} b={b}");
            }
        }
    }

    fn random_e(rng: &mut StdRng, n: usize) -> Vec<SuperPolynomial> {
        let shape = DensityShape { max_order: 3, max_factors: 2, terms: 2, ..Default::default() };
        (0..=n).map(|_| random_density(rng, hat(), &shape)).collect()
    }

    #[test]
    fn s_and_e_systems_agree() {
        let mut rng = StdRng::seed_from_u64(11);
        for n in [2, 4, 6] {
            for _ in 0..4 {
                assert!(verify_se_equivalence(&random_e(&mut rng, n)).unwrap(), "n={n}");
            }
        }
    }

    #[test]
    fn e_system_needs_even_n() {
        let mut rng = StdRng::seed_from_u64(2);
        assert_eq!(big_e_from_e(&random_e(&mut rng, 3)).unwrap_err().code(), "unsupported");
        let a = hat();
        let d = build_ese(&a.u(2), &a.zero(), 3).unwrap();
        assert!(d.big_e.is_none());
        assert_eq!(d.e.len(), 4);
    }

    #[test]
    fn e_coefficients_of_a_simple_pair() {
        // f = u u_2, g = 0: e_0 = u_2, e_1 = 0, e_2 = u
        let a = hat();
        let e = e_coefficients(&(&a.u(0) * &a.u(2)), &a.zero(), 2);
        assert_eq!(e, vec![a.u(2), a.zero(), a.u(0)]);
        // S_0 = 2 e_0 - 2 e_1' + 3 e_2'', S_1 = e_1 - 2 e_1 + 3 e_2', S_2 = 2 e_2
        let s = s_from_e(&e);
        assert_eq!(s, vec![a.u(2).scale(&rat(5, 1)), a.u(1).scale(&rat(3, 1)), a.u(0).scale(&rat(2, 1))]);
    }

    fn coboundary_pair(a: &SuperPolynomial, b: &SuperPolynomial, c: &SuperPolynomial) -> CocyclePair {
        CocyclePair::coboundary(a, b, c)
    }

    fn random_b(rng: &mut StdRng) -> SuperPolynomial {
        let shape = DensityShape { max_order: 3, max_factors: 3, terms: 3, ..Default::default() };
        loop {
            let b = random_density(rng, hat(), &shape);
            let u3 = JetCoordinate::u(3);
            if !b.partial_u(u3).partial_u(u3).is_zero() {
                return b;
            }
        }
    }

    #[test]
    fn coboundaries_satisfy_the_s_system() {
        let mut rng = StdRng::seed_from_u64(5);
        let u = hat().u(0);
        for _ in 0..3 {
            let h = random_b(&mut rng);
            let pair = coboundary_pair(&(&u.pow(2) * &h).scale(&rat(-1, 1)), &(&u * &h), &h);
            assert!(pair.s_system_vanishes());
            assert!(pair.order() <= 6);
            assert!(coboundary_pair(&hat().zero(), &h, &hat().zero()).cocycle().unwrap().is_zero());
            let b = random_b(&mut rng);
            assert!(coboundary_pair(&b, &hat().zero(), &hat().zero()).s_system_vanishes());
        }
        let bad = CocyclePair { f: hat().u(2), g: hat().zero() };
        assert!(!bad.s_system_vanishes());
        assert_eq!(CocyclePair::new(hat().u(2), hat().zero()).unwrap_err().code(), "not_cocycle");
    }

    #[test]
    fn quasi_step_lowers_order() {
        let mut rng = StdRng::seed_from_u64(17);
        let u = hat().u(0);
        for _ in 0..3 {
            let h = random_b(&mut rng);
            let lower = random_density(&mut rng, hat(), &DensityShape { max_order: 2, ..Default::default() });
            let pair = coboundary_pair(&(&u.pow(2) * &h).scale(&rat(-1, 1)), &(&u * &h), &(&h + &lower));
            assert_eq!(pair.order(), 6);
            let step = quasi_step(&pair, 6).unwrap();
            assert!(step.pair.order() <= 4, "order {}", step.pair.order());
            assert!(step.pair.s_system_vanishes());
            // the recorded modification reproduces the output
            let mut check = pair.clone();
            let m = step.modification;
            check.modify(&m.a, &m.b, &m.c);
            assert_eq!(check, step.pair);
        }
    }

    #[test]
    fn quasi_step_preconditions() {
        let a = hat();
        let pair = CocyclePair { f: a.zero(), g: a.zero() };
        assert_eq!(quasi_step(&pair, 2).unwrap_err().code(), "precondition");
        let bad = CocyclePair { f: a.u(2), g: a.zero() };
        assert_eq!(quasi_step(&bad, 4).unwrap_err().code(), "not_cocycle");
    }

    fn tail(c1: MultiVector) -> Cochain {
        let zero = MultiVector::zero(c1.algebra(), 2);
        Cochain::new(vec![zero, c1]).unwrap()
    }

    fn witness_of(q: QuasiTriviality) -> QuasiWitness {
        match q {
            QuasiTriviality::Trivialized(w) => w,
            QuasiTriviality::NontrivialAtDegreeZero => panic!("unexpected nontriviality"),
        }
    }

    #[test]
    fn degree_two_witness_reproduces_cocycle() {
        let a = Algebra::SCALAR;
        let pencil = dkdv_pencil_hat();
        for p in [a.one(), a.u(0), a.u(0).pow(2)] {
            let h = p.scale(&rat(2, 3)).integrate_in(JetCoordinate::u(0)).unwrap();
            let b0 = degree_two_witness(&h).unwrap();
            assert!(d_h(pencil.p(), &b0).unwrap().is_zero());
            let target = MultiVector::from_density(&(&(&p * &a.theta(1)) * &a.theta(2)).scale(&rat(-1, 1))).unwrap();
            assert_eq!(d_h(pencil.q(), &b0).unwrap(), target.to_hat().unwrap());
            let w = witness_of(quasi_trivialize(&tail(target), 2).unwrap());
            assert!(d_h(pencil.p(), &w.b0).unwrap().is_zero());
        }
    }

    #[test]
    fn kdv_deformation_is_quasitrivial() {
        let a = Algebra::SCALAR;
        let c1 = MultiVector::from_density(&(&a.theta(0) * &a.theta(3)).scale(&rat(3, 4))).unwrap();
        witness_of(quasi_trivialize(&tail(c1), 2).unwrap());
    }

    #[test]
    fn exact_cocycles_in_higher_degree() {
        let a = Algebra::SCALAR;
        let pencil = dkdv_pencil();
        let mut rng = StdRng::seed_from_u64(23);
        for ell in [1i64, 3, 4] {
            let shape = DensityShape { max_order: 4, max_factors: 4, terms: 3, degree: Some(ell - 1), ..Default::default() };
            let x = MultiVector::from_density_with_degree(&random_density(&mut rng, a, &shape), 0).unwrap();
            let c1 = d_h(pencil.q(), &d_h(pencil.p(), &x).unwrap()).unwrap();
            if c1.is_zero() {
                continue;
            }
            witness_of(quasi_trivialize(&tail(c1), ell).unwrap());
        }
    }

    #[test]
    fn degree_zero() {
        let a = Algebra::SCALAR;
        let tt = MultiVector::from_density(&(&a.theta(0) * &a.theta(1)).scale(&rat(3, 1))).unwrap();
        let w = witness_of(quasi_trivialize(&tail(tt), 0).unwrap());
        assert_eq!(*w.b0.rep(), hat().theta(0).scale(&rat(-6, 1)));
        let s = MultiVector::from_density(&(&(&a.u(0) * &a.theta(0)) * &a.theta(1))).unwrap();
        assert!(matches!(quasi_trivialize(&tail(s), 0).unwrap(), QuasiTriviality::NontrivialAtDegreeZero));
    }

    #[test]
    fn quasi_trivialize_rejects_bad_input() {
        let a = Algebra::SCALAR;
        let c1 = MultiVector::from_density(&(&a.theta(1) * &a.theta(2))).unwrap();
        let not_tail = Cochain::new(vec![c1.clone(), c1.clone()]).unwrap();
        assert_eq!(quasi_trivialize(&not_tail, 2).unwrap_err().code(), "not_tail_form");
        assert_eq!(quasi_trivialize(&tail(c1), 3).unwrap_err().code(), "precondition");
        let open = MultiVector::from_density(&(&(&a.u(0).pow(2) * &a.theta(0)) * &a.theta(3))).unwrap();
        assert_eq!(quasi_trivialize(&tail(open), 2).unwrap_err().code(), "not_cocycle");
    }

    #[test]
    fn psi_solves_its_equation() {
        assert!(!psi_check());
        assert_eq!(psi_residual(&psi(), &hat().zero()), hat().u(3).scale(&rat(-1, 1)));
        assert!(psi_residual(&psi_solution(), &hat().u(3)).is_zero());
        assert!(!psi_residual(&psi_solution(), &hat().u(3).scale(&rat(-1, 1))).is_zero());
    }

    #[test]
    fn normal_form_dictionary() {
        let a = hat();
        let u = a.u(0);
        for s in [a.one(), u.clone(), u.pow(3)] {
            let s1 = s.partial_u(JetCoordinate::u(0));
            let s2 = s1.partial_u(JetCoordinate::u(0));
            let c2 = (&a.u(1) * &s1).scale(&rat(3, 2));
            let c1 = (&(&a.u(2) * &s1) + &(&a.u(1).pow(2) * &s2)).scale(&rat(1, 2));
            let op = &(&(&s * &a.theta(3)) + &(&c2 * &a.theta(2))) + &(&c1 * &a.theta(1));
            let expected = (&a.theta(0) * &op).scale(&rat(-1, 1));
            let lhs = half_normal_form(&(&(&s * &a.theta(1)) * &a.theta(2)));
            assert_eq!(lhs, expected);
        }
    }
}
