//! Deformations of Hamiltonian bivectors, their obstructions, the
//! bihamiltonian double complex and a graded linear solver for `d_H y = c`.

use crate::error::{Error, Result};
use crate::jetcore::{Algebra, JetCoordinate, Monomial, OddCoordinate, SuperPolynomial};
use crate::linalg::{combine, solve_combination};
use crate::schouten::{bracket, d_h, Pencil};
use crate::variational::{vf_from_density, EvolutionaryVF, MultiVector};
use crate::{rat, Rational};

/// `H = H_0 + sum_{k=1}^N eps^k H_k`, truncated at `eps^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonDeformation {
    terms: Vec<MultiVector>,
}

impl EpsilonDeformation {
    /// `corrections[k-1]` is `H_k`; missing corrections up to `truncation` are zero.
    pub fn new(base: MultiVector, corrections: Vec<MultiVector>, truncation: usize) -> Result<Self> {
        if corrections.len() > truncation {
            return Err(Error::Precondition(format!(
                "{} corrections exceed truncation {truncation}",
                corrections.len()
            )));
        }
        let alg = base.algebra();
        let mut terms = vec![base];
        terms.extend(corrections);
        for t in &terms {
            alg.compatible(&t.algebra())?;
            if t.theta_degree() != 2 && !t.is_zero() {
                return Err(Error::WrongThetaDegree { expected: 2, found: t.theta_degree() });
            }
        }
        terms.resize(truncation + 1, MultiVector::zero(alg, 2));
        for t in terms.iter_mut() {
            if t.is_zero() {
                *t = MultiVector::zero(alg, 2);
            }
        }
        Ok(Self { terms })
    }

    /// The undeformed bivector viewed as a deformation.
    pub fn undeformed(base: MultiVector, truncation: usize) -> Result<Self> {
        Self::new(base, Vec::new(), truncation)
    }

    pub fn base(&self) -> &MultiVector {
        &self.terms[0]
    }

    /// `H_k`, zero beyond the truncation.
    pub fn term(&self, k: usize) -> MultiVector {
        self.terms.get(k).cloned().unwrap_or_else(|| MultiVector::zero(self.algebra(), 2))
    }

    pub fn corrections(&self) -> &[MultiVector] {
        &self.terms[1..]
    }

    pub fn truncation(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn algebra(&self) -> Algebra {
        self.terms[0].algebra()
    }

    /// Truncate or pad with zeros.
    pub fn with_truncation(mut self, n: usize) -> Self {
        let alg = self.algebra();
        self.terms.resize(n + 1, MultiVector::zero(alg, 2));
        self
    }

    pub fn to_hat(&self) -> Result<Self> {
        Ok(Self { terms: self.terms.iter().map(|t| t.to_hat()).collect::<Result<_>>()? })
    }

    /// Every `H_k` (`k >= 1`) is homogeneous of degree `k p + 1`.
    pub fn is_homogeneous(&self, p: i64) -> bool {
        self.terms
            .iter()
            .enumerate()
            .skip(1)
            .all(|(k, t)| t.is_zero() || t.degree() == Some(k as i64 * p + 1))
    }
}

/// `eps^k` coefficient of `1/2 [[H, H]]` for `0 <= k <= N`.
pub fn mc_residual(d: &EpsilonDeformation) -> Result<Vec<MultiVector>> {
    let n = d.truncation();
    (0..=n).map(|k| half_bracket_sum(d, d, k)).collect()
}

/// `1/2 sum_{i+j=k} [[A_i, B_j]]`.
fn half_bracket_sum(a: &EpsilonDeformation, b: &EpsilonDeformation, k: usize) -> Result<MultiVector> {
    let mut acc = MultiVector::zero(a.algebra(), 3);
    for i in 0..=k {
        acc = &acc + &bracket(&a.term(i), &b.term(k - i))?;
    }
    Ok(acc.scale(&rat(1, 2)))
}

/// The `n`-th obstruction cocycle `sum_{i=1}^n [[H_i, H_{n-i+1}]]` of an
/// order-`n` deformation. The result is checked to be `d_{H_0}`-closed.
pub fn obstruction(d: &EpsilonDeformation, n: usize) -> Result<MultiVector> {
    if n == 0 || n > d.truncation() {
        return Err(Error::Precondition(format!("obstruction order {n} outside 1..={}", d.truncation())));
    }
    for (k, r) in mc_residual(d)?.iter().enumerate().take(n + 1) {
        if !r.is_zero() {
            return Err(Error::MaurerCartan(k));
        }
    }
    let mut acc = MultiVector::zero(d.algebra(), 3);
    for i in 1..=n {
        acc = &acc + &bracket(&d.term(i), &d.term(n - i + 1))?;
    }
    if !d_h(d.base(), &acc)?.is_zero() {
        return Err(Error::Internal("obstruction is not closed".into()));
    }
    Ok(acc)
}

/// An element `(c_0, ..., c_k)` of the total complex of the double complex.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    entries: Vec<MultiVector>,
}

impl Cochain {
    pub fn new(entries: Vec<MultiVector>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::BadIndex("a cochain needs at least one entry".into()));
        }
        let nz: Vec<_> = entries.iter().filter(|e| !e.is_zero()).collect();
        if let Some(first) = nz.first() {
            if let Some(bad) = nz.iter().find(|e| e.theta_degree() != first.theta_degree()) {
                return Err(Error::WrongThetaDegree { expected: first.theta_degree(), found: bad.theta_degree() });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[MultiVector] {
        &self.entries
    }

    pub fn bidegree(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// `(0, ..., 0, c)`.
    pub fn is_tail_form(&self) -> bool {
        self.entries[..self.entries.len() - 1].iter().all(|e| e.is_zero())
    }
}

/// `(c_0, ..., c_k) -> (d_P c_0, d_Q c_0 + d_P c_1, ..., d_Q c_k)`.
pub fn bicomplex_d(pencil: &Pencil, c: &Cochain) -> Result<Cochain> {
    let k = c.entries.len();
    let mut out = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut acc = MultiVector::zero(pencil.p().algebra(), 0);
        if i < k {
            acc = &acc + &d_h(pencil.p(), &c.entries[i])?;
        }
        if i > 0 {
            acc = &acc + &d_h(pencil.q(), &c.entries[i - 1])?;
        }
        out.push(acc);
    }
    Cochain::new(out)
}

/// The first bihamiltonian obstruction `(1/2 [[P1,P1]], [[P1,Q1]], 1/2 [[Q1,Q1]])`
/// of the infinitesimal deformations read off the two series.
pub fn biham_obstruction(p: &EpsilonDeformation, q: &EpsilonDeformation) -> Result<Cochain> {
    let pencil = Pencil::new(p.base().clone(), q.base().clone())?;
    let p1 = p.term(1);
    let q1 = q.term(1);
    let first = bicomplex_d(&pencil, &Cochain::new(vec![p1.clone(), q1.clone()])?)?;
    if !first.is_zero() {
        return Err(Error::FirstOrderIncompatible);
    }
    let half = rat(1, 2);
    let c = Cochain::new(vec![
        bracket(&p1, &p1)?.scale(&half),
        bracket(&p1, &q1)?,
        bracket(&q1, &q1)?.scale(&half),
    ])?;
    if !bicomplex_d(&pencil, &c)?.is_zero() {
        return Err(Error::Internal("bihamiltonian obstruction is not closed".into()));
    }
    Ok(c)
}

/// All three components of the bihamiltonian Maurer-Cartan equation
/// `[[P,P]] = [[P,Q]] = [[Q,Q]] = 0` for a pair of series, by order.
pub fn biham_mc_residual(p: &EpsilonDeformation, q: &EpsilonDeformation) -> Result<Vec<[MultiVector; 3]>> {
    let n = p.truncation().min(q.truncation());
    (0..=n)
        .map(|k| Ok([half_bracket_sum(p, p, k)?, half_bracket_sum(p, q, k)?.scale(&rat(2, 1)), half_bracket_sum(q, q, k)?]))
        .collect()
}

/// Push a deformation forward along `exp(-eps^p ad_X)`, truncated at `eps^N`.
/// If `X` lives in the hat algebra the result does too.
pub fn miura_push(d: &EpsilonDeformation, x: &EvolutionaryVF, p: usize, n: usize) -> Result<EpsilonDeformation> {
    if p == 0 {
        return Err(Error::Precondition("weight must be positive".into()));
    }
    let xm = x.to_multivector();
    let d = if xm.algebra().hat && !d.algebra().hat { d.to_hat()? } else { d.clone() };
    d.algebra().compatible(&xm.algebra())?;
    let alg = d.algebra();
    let mut out = vec![MultiVector::zero(alg, 2); n + 1];
    for k in 0..=n.min(d.truncation()) {
        let mut y = d.term(k);
        let mut m = 0usize;
        let mut coeff = Rational::from_integer(1.into());
        while k + m * p <= n {
            out[k + m * p] = &out[k + m * p] + &y.scale(&coeff);
            m += 1;
            coeff = -coeff / Rational::from_integer((m as i64).into());
            y = bracket(&xm, &y)?;
            if y.is_zero() {
                break;
            }
        }
    }
    let base = out.remove(0);
    EpsilonDeformation::new(base, out, n)
}

/// A finite graded piece of the space of densities in which solutions are sought.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradedSlice {
    pub theta_degree: usize,
    /// Homogeneity degree of the densities.
    pub degree: i64,
    pub max_order: u16,
    /// Bound on the total exponent of the order-zero fields.
    pub max_udeg: i32,
    /// Deepest allowed power of `u_1^-1` (hat algebra only).
    pub max_laurent: i32,
    pub hat: bool,
}

impl GradedSlice {
    /// Bounds only; the target grading is filled in by the solvers.
    pub fn bounds(max_order: u16, max_udeg: i32) -> Self {
        Self { theta_degree: 0, degree: 0, max_order, max_udeg, max_laurent: 0, hat: false }
    }

    pub fn with_hat(mut self, max_laurent: i32) -> Self {
        self.hat = true;
        self.max_laurent = max_laurent;
        self
    }

    pub fn with_target(mut self, theta_degree: usize, degree: i64) -> Self {
        self.theta_degree = theta_degree;
        self.degree = degree;
        self
    }

    /// The index `l` with slice elements in `L^{k}<l>`, `k = theta_degree - 1`.
    pub fn ell(&self) -> i64 {
        self.degree - self.theta_degree as i64 + 1
    }

    /// A spanning set of the slice modulo total derivatives: for positive
    /// theta-degree, `theta_alpha` times monomials with one fewer odd factor.
    pub fn basis(&self, alg: Algebra) -> Vec<SuperPolynomial> {
        let mut out = Vec::new();
        if self.theta_degree == 0 {
            for m in enumerate_monomials(alg, self, 0, self.degree) {
                out.push(alg.term(Rational::from_integer(1.into()), m));
            }
            return out;
        }
        for m in enumerate_monomials(alg, self, self.theta_degree - 1, self.degree) {
            for alpha in 1..=alg.q {
                let t = OddCoordinate::new(alpha, 0);
                if m.contains_odd(t) {
                    continue;
                }
                out.push(&alg.theta_alpha(alpha, 0) * &alg.term(Rational::from_integer(1.into()), m.clone()));
            }
        }
        out
    }

    fn grown(&self, cap_order: u16, cap_udeg: i32) -> Option<Self> {
        let next = Self {
            max_order: (self.max_order * 2).max(1).min(cap_order),
            max_udeg: (self.max_udeg * 2).max(1).min(cap_udeg),
            ..*self
        };
        (next != *self).then_some(next)
    }
}

/// Monomials with `odd` odd factors and total degree `degree` within the slice bounds.
fn enumerate_monomials(alg: Algebra, s: &GradedSlice, odd: usize, degree: i64) -> Vec<Monomial> {
    let laurent = if s.hat && alg.hat { s.max_laurent } else { 0 };
    let mut odd_sets: Vec<(Vec<OddCoordinate>, i64)> = Vec::new();
    let odd_coords: Vec<OddCoordinate> = (1..=alg.q)
        .flat_map(|a| (0..=s.max_order).map(move |k| OddCoordinate::new(a, k)))
        .collect();
    choose(&odd_coords, odd, 0, &mut Vec::new(), &mut odd_sets);
    let mut out = Vec::new();
    for (odd_set, odd_deg) in odd_sets {
        let budget = degree - odd_deg;
        if budget < -(laurent as i64) {
            continue;
        }
        let mut even: Vec<(JetCoordinate, i32)> = Vec::new();
        even_parts(alg, s, laurent, s.max_order, 1, budget, &mut even, &mut |ev| {
            udeg_parts(alg, s.max_udeg, 1, ev, &mut |full| {
                if let Some((m, _)) = Monomial::from_parts(full.iter().copied(), odd_set.iter().copied()) {
                    out.push(m);
                }
            });
        });
    }
    out.sort();
    out.dedup();
    out
}

fn choose(
    coords: &[OddCoordinate],
    k: usize,
    start: usize,
    cur: &mut Vec<OddCoordinate>,
    out: &mut Vec<(Vec<OddCoordinate>, i64)>,
) {
    if cur.len() == k {
        out.push((cur.clone(), cur.iter().map(|t| t.order as i64).sum()));
        return;
    }
    for i in start..coords.len() {
        cur.push(coords[i]);
        choose(coords, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Distribute `budget` over positive-order coordinates, highest order first.
#[allow(clippy::too_many_arguments)]
fn even_parts(
    alg: Algebra,
    s: &GradedSlice,
    laurent: i32,
    order: u16,
    alpha: u16,
    budget: i64,
    cur: &mut Vec<(JetCoordinate, i32)>,
    emit: &mut dyn FnMut(&[(JetCoordinate, i32)]),
) {
    if order == 0 {
        if budget == 0 {
            emit(cur);
        }
        return;
    }
    let (next_order, next_alpha) = if alpha < alg.q { (order, alpha + 1) } else { (order - 1, 1) };
    let v = JetCoordinate::new(alpha, order);
    let last_slot = order == 1 && alpha == alg.q;
    if last_slot {
        // the remaining budget is forced
        let e = budget;
        if e < -(laurent as i64) || (e < 0 && !(alg.q == 1)) {
            return;
        }
        if e != 0 {
            cur.push((v, e as i32));
        }
        emit(cur);
        if e != 0 {
            cur.pop();
        }
        return;
    }
    let max_e = (budget + laurent as i64).max(0) / order as i64;
    for e in 0..=max_e {
        if e > 0 {
            cur.push((v, e as i32));
        }
        even_parts(alg, s, laurent, next_order, next_alpha, budget - e * order as i64, cur, emit);
        if e > 0 {
            cur.pop();
        }
    }
}

/// Add order-zero factors of total exponent at most `max_udeg`.
fn udeg_parts(
    alg: Algebra,
    remaining: i32,
    alpha: u16,
    cur: &[(JetCoordinate, i32)],
    emit: &mut dyn FnMut(&[(JetCoordinate, i32)]),
) {
    if alpha > alg.q {
        emit(cur);
        return;
    }
    for e in 0..=remaining.max(0) {
        let mut next = cur.to_vec();
        if e > 0 {
            next.push((JetCoordinate::new(alpha, 0), e));
        }
        udeg_parts(alg, remaining - e, alpha + 1, &next, emit);
    }
}

/// Growth cap used when a slice is too small.
const ORDER_CAP: u16 = 8;
const UDEG_CAP: i32 = 8;

/// Solve `d_H y = c` for homogeneous `c` on one slice.
fn solve_on_slice(c: &MultiVector, h: &MultiVector, slice: &GradedSlice) -> Result<Option<MultiVector>> {
    let alg = c.algebra();
    let basis = slice.basis(alg);
    let mut images = Vec::with_capacity(basis.len());
    let mut classes = Vec::with_capacity(basis.len());
    for b in &basis {
        let mv = MultiVector::from_density_with_degree(b, slice.theta_degree)?;
        images.push(vec![d_h(h, &mv)?.rep().clone()]);
        classes.push(mv);
    }
    let Some(x) = solve_combination(&images, &[c.rep().clone()]) else { return Ok(None) };
    let dens = combine(&basis, &x, alg.zero());
    Ok(Some(MultiVector::from_density_with_degree(&dens, slice.theta_degree)?))
}

/// Find `y` with `d_H y = c` by exact linear algebra on graded slices.
///
/// Only the order, u-degree and Laurent bounds of `slice` are used; the
/// theta-degree and degree of each homogeneous component are read off `c`.
/// The slice is grown by doubling up to a fixed cap before giving up. Among
/// the solutions, the one with all free coordinates zero is returned.
pub fn primitive_solve(c: &MultiVector, h: &MultiVector, slice: &GradedSlice) -> Result<MultiVector> {
    if h.theta_degree() != 2 {
        return Err(Error::WrongThetaDegree { expected: 2, found: h.theta_degree() });
    }
    if !d_h(h, c)?.is_zero() {
        return Err(Error::NotCocycle("d_H c is not zero".into()));
    }
    if c.theta_degree() == 0 {
        if c.is_zero() {
            return Ok(MultiVector::zero(c.algebra(), 0));
        }
        return Err(Error::NoSolution);
    }
    let k = c.theta_degree() - 1;
    let h_deg = h.degree().ok_or_else(|| Error::Precondition("bivector must be homogeneous".into()))?;
    let mut total = MultiVector::zero(c.algebra(), k);
    for (deg, part) in c.degree_components() {
        let mut s = slice.with_target(k, deg - h_deg);
        if c.algebra().hat && !s.hat {
            s = s.with_hat(1);
        }
        let y = loop {
            if let Some(y) = solve_on_slice(&part, h, &s)? {
                break y;
            }
            match s.grown(ORDER_CAP.max(slice.max_order), UDEG_CAP.max(slice.max_udeg)) {
                Some(next) => s = next,
                None => return Err(Error::NoSolution),
            }
        };
        total = &total + &y;
    }
    if d_h(h, &total)? != *c {
        return Err(Error::Internal("primitive does not reproduce the cocycle".into()));
    }
    Ok(total)
}

/// Result of [`reduce_to_tail`]: `input - d(chain) = tail`.
#[derive(Clone, Debug)]
pub struct TailReduction {
    pub tail: Cochain,
    /// `a_0, ..., a_{k-1}` used in the successive subtractions.
    pub chain: Vec<MultiVector>,
}

/// Bring a cocycle of the total complex to the form `(0, ..., 0, c')` by
/// successively solving `d_P a_i = c_i` and replacing `c_{i+1}` by
/// `c_{i+1} - d_Q a_i`.
pub fn reduce_to_tail(pencil: &Pencil, c: &Cochain, slice: &GradedSlice) -> Result<TailReduction> {
    if !bicomplex_d(pencil, c)?.is_zero() {
        return Err(Error::NotCocycle("d c is not zero".into()));
    }
    let mut entries = c.entries.clone();
    let mut chain = Vec::new();
    for i in 0..entries.len() - 1 {
        let a = if entries[i].is_zero() {
            let k = entries.iter().find(|e| !e.is_zero()).map_or(1, |e| e.theta_degree().max(1) - 1);
            MultiVector::zero(pencil.p().algebra(), k)
        } else {
            primitive_solve(&entries[i], pencil.p(), slice)?
        };
        entries[i] = MultiVector::zero(pencil.p().algebra(), entries[i].theta_degree());
        entries[i + 1] = &entries[i + 1] - &d_h(pencil.q(), &a)?;
        chain.push(a);
    }
    Ok(TailReduction { tail: Cochain::new(entries)?, chain })
}

/// Result of [`homogenize`]: the new deformation and the vector fields `I_k`
/// pushed along at weight `k`.
#[derive(Clone, Debug)]
pub struct Homogenized {
    pub deformation: EpsilonDeformation,
    pub witnesses: Vec<MultiVector>,
}

/// Replace `D` by an equivalent deformation with `H_k` homogeneous of degree
/// `k p + 1`, removing the stray components one order at a time.
pub fn homogenize(d: &EpsilonDeformation, p: i64, slice: &GradedSlice) -> Result<Homogenized> {
    let h1 = d.term(1);
    if !h1.is_zero() && h1.degree() != Some(p + 1) {
        return Err(Error::Precondition(format!("first correction is not homogeneous of degree {}", p + 1)));
    }
    let n = d.truncation();
    let mut cur = d.clone();
    let mut witnesses = Vec::new();
    for k in 1..=n {
        let target = k as i64 * p + 1;
        let mut stray = MultiVector::zero(cur.algebra(), 2);
        for (deg, part) in cur.term(k).degree_components() {
            if deg != target {
                stray = &stray + &part;
            }
        }
        if stray.is_zero() {
            witnesses.push(MultiVector::zero(cur.algebra(), 1));
            continue;
        }
        let y = primitive_solve(&stray, cur.base(), slice)?;
        let x = vf_from_density(&(-&y).rep().clone())?;
        cur = miura_push(&cur, &x, k, n)?;
        witnesses.push(-&y);
    }
    if !cur.is_homogeneous(p) {
        return Err(Error::Internal("homogenization left stray components".into()));
    }
    Ok(Homogenized { deformation: cur, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, DensityShape};
    use crate::variational::{operator_to_bivector, OperatorMatrix};
    use crate::DiffOperator;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    const A: Algebra = Algebra::SCALAR;

    fn mv(p: SuperPolynomial) -> MultiVector {
        MultiVector::from_density(&p).unwrap()
    }

    fn p_biv() -> MultiVector {
        mv((&A.theta(0) * &A.theta(1)).scale(&rat(1, 2)))
    }

    fn q_biv() -> MultiVector {
        mv((&(&A.u(0) * &A.theta(0)) * &A.theta(1)).scale(&rat(1, 2)))
    }

    fn third_order() -> MultiVector {
        let op = DiffOperator::del_power(A, 3).scale(&rat(3, 2));
        operator_to_bivector(&OperatorMatrix::scalar(op)).unwrap()
    }

    fn pencil() -> Pencil {
        Pencil::new(p_biv(), q_biv()).unwrap()
    }

    fn zero2() -> MultiVector {
        MultiVector::zero(A, 2)
    }

    /// `u^2 theta theta_3`, not d_P-closed.
    fn bad_correction() -> MultiVector {
        mv(&(&A.u(0).pow(2) * &A.theta(0)) * &A.theta(3))
    }

    #[test]
    fn bad_correction_is_not_closed() {
        // d_P F = -theta_1 delta_u F, and delta_u(u^2 theta theta_3) = 2 u theta theta_3
        let expected = mv(&(&(&A.u(0) * &A.theta(1)) * &A.theta(0)) * &A.theta(3)).scale(&rat(-2, 1));
        let got = d_h(&p_biv(), &bad_correction()).unwrap();
        assert_eq!(got, expected);
        assert!(!got.is_zero());
    }

    fn all_zero(v: &[MultiVector]) -> bool {
        v.iter().all(|x| x.is_zero())
    }

    #[test]
    fn residuals_of_known_deformations() {
        let d = EpsilonDeformation::undeformed(p_biv(), 3).unwrap();
        assert!(all_zero(&mc_residual(&d).unwrap()));
        let kdv = EpsilonDeformation::new(q_biv(), vec![zero2(), third_order()], 4).unwrap();
        assert!(all_zero(&mc_residual(&kdv).unwrap()));
        let pq = EpsilonDeformation::new(p_biv(), vec![q_biv()], 2).unwrap();
        assert!(all_zero(&mc_residual(&pq).unwrap()));
        let bad = EpsilonDeformation::new(p_biv(), vec![bad_correction()], 1).unwrap();
        assert!(!all_zero(&mc_residual(&bad).unwrap()));
    }

    #[test]
    fn obstruction_examples() {
        let d = EpsilonDeformation::new(q_biv(), vec![third_order()], 1).unwrap();
        assert!(obstruction(&d, 1).unwrap().is_zero());
        // a trivial infinitesimal deformation d_Q X
        let x = mv(&A.u(0).pow(2) * &(&A.u(2) * &A.theta(0)));
        let h1 = d_h(&q_biv(), &x).unwrap();
        let d = EpsilonDeformation::new(q_biv(), vec![h1.clone()], 1).unwrap();
        let o = obstruction(&d, 1).unwrap();
        assert_eq!(o, bracket(&h1, &h1).unwrap());
        let bad = EpsilonDeformation::new(p_biv(), vec![bad_correction()], 1).unwrap();
        assert_eq!(obstruction(&bad, 1).unwrap_err(), Error::MaurerCartan(1));
    }

    #[test]
    fn biham_obstruction_examples() {
        let p = EpsilonDeformation::new(p_biv(), vec![zero2()], 1).unwrap();
        let q = EpsilonDeformation::new(q_biv(), vec![third_order()], 1).unwrap();
        assert!(biham_obstruction(&p, &q).unwrap().is_zero());
        let q0 = EpsilonDeformation::new(q_biv(), vec![zero2()], 1).unwrap();
        assert!(biham_obstruction(&p, &q0).unwrap().is_zero());
        let a = mv(&A.u(1).pow(2) * &A.theta(0));
        let da = bicomplex_d(&pencil(), &Cochain::new(vec![a]).unwrap()).unwrap();
        let p = EpsilonDeformation::new(p_biv(), vec![da.entries()[0].clone()], 1).unwrap();
        let q = EpsilonDeformation::new(q_biv(), vec![da.entries()[1].clone()], 1).unwrap();
        let c = biham_obstruction(&p, &q).unwrap();
        assert_eq!(c.bidegree(), 2);
        let p_bad = EpsilonDeformation::new(p_biv(), vec![zero2()], 1).unwrap();
        let q_bad = EpsilonDeformation::new(q_biv(), vec![bad_correction()], 1).unwrap();
        assert_eq!(biham_obstruction(&p_bad, &q_bad).unwrap_err(), Error::FirstOrderIncompatible);
    }

    #[test]
    fn miura_examples() {
        let d = EpsilonDeformation::undeformed(p_biv(), 2).unwrap();
        let t = EvolutionaryVF::scalar(A.u(1)).unwrap();
        assert_eq!(miura_push(&d, &t, 1, 2).unwrap(), d);
        let x = EvolutionaryVF::scalar(&A.u(0).pow(2) * &A.u(1)).unwrap();
        let pushed = miura_push(&d, &x, 1, 1).unwrap();
        let expected = -&bracket(&x.to_multivector(), &p_biv()).unwrap();
        assert_eq!(pushed.term(1), expected);
        let neg = EvolutionaryVF::scalar(-&x.characteristic()[0]).unwrap();
        assert_eq!(miura_push(&miura_push(&d, &x, 1, 3).unwrap(), &neg, 1, 3).unwrap(), d.clone().with_truncation(3));
    }

    #[test]
    fn primitive_solve_examples() {
        let s = GradedSlice::bounds(2, 3);
        let f = mv(A.u(0).pow(3).scale(&rat(1, 6)));
        let c = d_h(&p_biv(), &f).unwrap();
        let y = primitive_solve(&c, &p_biv(), &s).unwrap();
        assert_eq!(d_h(&p_biv(), &y).unwrap(), c);
        assert!(d_h(&p_biv(), &(&y - &f)).unwrap().is_zero());
        // int theta theta_1 = d_P int u theta
        let tt = mv(&A.theta(0) * &A.theta(1));
        let y = primitive_solve(&tt, &p_biv(), &s).unwrap();
        assert_eq!(y, mv(&A.u(0) * &A.theta(0)));
        // int theta is closed but not exact
        assert_eq!(primitive_solve(&mv(A.theta(0)), &p_biv(), &s).unwrap_err(), Error::NoSolution);
        for casimir in [A.one(), A.u(0)] {
            assert!(d_h(&p_biv(), &mv(casimir)).unwrap().is_zero());
        }
        let not_closed = mv(&A.u(0) * &A.theta(0));
        assert!(matches!(primitive_solve(&not_closed, &p_biv(), &s), Err(Error::NotCocycle(_))));
    }

    #[test]
    fn slice_basis_respects_bounds() {
        let s = GradedSlice::bounds(3, 2).with_target(2, 3);
        let b = s.basis(A);
        assert!(!b.is_empty());
        for x in &b {
            let g = x.grading_info().unwrap();
            assert_eq!(g.degree, Some(3));
            assert_eq!(g.theta_degree, Some(2));
            assert!(g.order <= 3);
            assert!(x.max_udeg() <= 2);
        }
        let h = GradedSlice::bounds(2, 1).with_hat(2).with_target(0, 0);
        assert!(h.basis(Algebra::HAT).iter().any(|p| p.to_string().contains("^-")));
    }

    #[test]
    fn tail_reduction() {
        let s = GradedSlice::bounds(3, 3);
        let a0 = mv(&A.u(0).pow(2) * &A.theta(1));
        let c = bicomplex_d(&pencil(), &Cochain::new(vec![a0]).unwrap()).unwrap();
        let r = reduce_to_tail(&pencil(), &c, &s).unwrap();
        assert!(r.tail.is_zero());
        let tail = Cochain::new(vec![zero2(), mv(&(&A.u(0) * &A.theta(1)) * &A.theta(2))]).unwrap();
        let r = reduce_to_tail(&pencil(), &tail, &s).unwrap();
        assert_eq!(r.tail, tail);
    }

    #[test]
    fn homogenize_removes_stray_term() {
        let stray = d_h(&p_biv(), &mv(&A.u(0).pow(4) * &A.theta(0))).unwrap();
        let h2 = &third_order() + &stray;
        let d = EpsilonDeformation::new(p_biv(), vec![zero2(), h2], 3).unwrap();
        assert!(all_zero(&mc_residual(&d).unwrap()));
        let out = homogenize(&d, 1, &GradedSlice::bounds(2, 4)).unwrap();
        assert_eq!(out.deformation.term(2), third_order());
        assert!(out.deformation.is_homogeneous(1));
        assert!(all_zero(&mc_residual(&out.deformation).unwrap()));
        let already = EpsilonDeformation::new(q_biv(), vec![zero2(), third_order()], 2).unwrap();
        assert_eq!(homogenize(&already, 1, &GradedSlice::bounds(2, 2)).unwrap().deformation, already);
        let inhom = EpsilonDeformation::new(p_biv(), vec![&third_order() + &q_biv()], 1).unwrap();
        assert!(matches!(homogenize(&inhom, 1, &GradedSlice::bounds(2, 2)), Err(Error::Precondition(_))));
    }

    fn random_mv(rng: &mut StdRng, k: usize, degree: Option<i64>) -> MultiVector {
        let shape = DensityShape { theta_degree: k, max_order: 2, max_factors: 2, terms: 2, degree };
        MultiVector::from_density_with_degree(&random_density(rng, A, &shape), k).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn d_squared_is_zero(seed in any::<u64>(), k in 0usize..3) {
            let mut rng = StdRng::seed_from_u64(seed);
            let c = Cochain::new(vec![random_mv(&mut rng, k, None), random_mv(&mut rng, k, None)]).unwrap();
            let dd = bicomplex_d(&pencil(), &bicomplex_d(&pencil(), &c).unwrap()).unwrap();
            prop_assert!(dd.is_zero());
        }

        #[test]
        fn miura_preserves_maurer_cartan(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let x = random_mv(&mut rng, 1, None);
            let x = vf_from_density(x.rep()).unwrap();
            let d = EpsilonDeformation::new(p_biv(), vec![q_biv()], 3).unwrap();
            let pushed = miura_push(&d, &x, 1, 3).unwrap();
            prop_assert!(all_zero(&mc_residual(&pushed).unwrap()));
        }

        #[test]
        fn primitive_of_random_coboundary(seed in any::<u64>(), k in 0usize..2) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_mv(&mut rng, k, Some(2));
            let c = d_h(&p_biv(), &a).unwrap();
            let y = primitive_solve(&c, &p_biv(), &GradedSlice::bounds(2, 2)).unwrap();
            prop_assert_eq!(d_h(&p_biv(), &y).unwrap(), c);
        }
    }
}
