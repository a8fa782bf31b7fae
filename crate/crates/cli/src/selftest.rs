//! Fast built-in identities.

use std::collections::BTreeMap;

use jetcalc::deform::{biham_mc_residual, Cochain, EpsilonDeformation};
use jetcalc::dkdv::{
    binomial_identity_check, degree_two_witness, dkdv_pencil, dkdv_pencil_hat, hierarchy, psi_residual, psi_solution,
    quasi_trivialize, QuasiTriviality,
};
use jetcalc::schouten::{bracket, d_h};
use jetcalc::variational::{operator_to_bivector, MultiVector, OperatorMatrix};
use jetcalc::{rat, Algebra, DiffOperator, Result};

pub fn run() -> Result<BTreeMap<String, bool>> {
    let s = Algebra::SCALAR;
    let mut out = BTreeMap::new();

    let p = dkdv_pencil();
    out.insert(
        "pencil".into(),
        bracket(p.p(), p.p())?.is_zero() && bracket(p.p(), p.q())?.is_zero() && bracket(p.q(), p.q())?.is_zero(),
    );

    let third = operator_to_bivector(&OperatorMatrix::scalar(DiffOperator::del_power(s, 3).scale(&rat(3, 2))))?;
    let q = EpsilonDeformation::new(p.q().clone(), vec![MultiVector::zero(s, 2), third], 4)?;
    let pd = EpsilonDeformation::undeformed(p.p().clone(), 4)?;
    out.insert("kdv_pencil_through_eps4".into(), biham_mc_residual(&pd, &q)?.iter().flatten().all(|r| r.is_zero()));

    let h = hierarchy(2)?;
    let u = s.u(0);
    out.insert(
        "hierarchy".into(),
        *h.density(0) == u.pow(2).scale(&rat(1, 3))
            && *h.density(1) == u.pow(3).scale(&rat(1, 6))
            && *h.density(2) == u.pow(4).scale(&rat(5, 48)),
    );

    out.insert("binomial_identity".into(), (0..=12).all(|a| (0..=12).all(|b| binomial_identity_check(a, b))));

    out.insert("psi_equation".into(), psi_residual(&psi_solution(), &Algebra::HAT.u(3)).is_zero());

    let hp = dkdv_pencil_hat();
    let hh = u.pow(2).scale(&rat(1, 3));
    let b0 = degree_two_witness(&hh)?;
    let c1 = MultiVector::from_density(&(&(&u * &s.theta(1)) * &s.theta(2)).scale(&rat(-1, 1)))?;
    out.insert(
        "degree_two_witness".into(),
        d_h(hp.p(), &b0)?.is_zero() && d_h(hp.q(), &b0)? == c1.to_hat()?,
    );

    let sc = MultiVector::from_density(&(&(&u * &s.theta(0)) * &s.theta(1)))?;
    let tail = Cochain::new(vec![MultiVector::zero(s, 2), sc])?;
    out.insert(
        "degree_zero_nontrivial".into(),
        matches!(quasi_trivialize(&tail, 0)?, QuasiTriviality::NontrivialAtDegreeZero),
    );
    Ok(out)
}
