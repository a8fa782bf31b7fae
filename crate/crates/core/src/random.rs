//! Seeded random densities for property tests and self-checks.

use rand::Rng;

use crate::jetcore::{Algebra, JetCoordinate, Monomial, OddCoordinate, SuperPolynomial};
use crate::rat;

/// Shape of a random density.
#[derive(Clone, Copy, Debug)]
pub struct DensityShape {
    pub theta_degree: usize,
    pub max_order: u16,
    /// Maximum number of even factors per monomial.
    pub max_factors: usize,
    pub terms: usize,
    /// Fixed homogeneity degree, if any.
    pub degree: Option<i64>,
}

impl Default for DensityShape {
    fn default() -> Self {
        Self { theta_degree: 0, max_order: 3, max_factors: 3, terms: 4, degree: None }
    }
}

fn random_coefficient<R: Rng>(rng: &mut R) -> crate::Rational {
    let mut n = rng.gen_range(-5i64..=5);
    if n == 0 {
        n = 1;
    }
    rat(n, rng.gen_range(1i64..=3))
}

/// A random monomial; `None` when a degree constraint could not be met.
pub fn random_monomial<R: Rng>(rng: &mut R, alg: Algebra, shape: &DensityShape) -> Option<Monomial> {
    if (shape.max_order as usize + 1) * (alg.q as usize) < shape.theta_degree {
        return None;
    }
    let mut odd = Vec::new();
    while odd.len() < shape.theta_degree {
        let t = OddCoordinate::new(rng.gen_range(1..=alg.q), rng.gen_range(0..=shape.max_order));
        if !odd.contains(&t) {
            odd.push(t);
        }
    }
    let mut even: Vec<(JetCoordinate, i32)> = Vec::new();
    let nf = rng.gen_range(0..=shape.max_factors);
    for _ in 0..nf {
        even.push((JetCoordinate::new(rng.gen_range(1..=alg.q), rng.gen_range(0..=shape.max_order)), 1));
    }
    if alg.hat && rng.gen_bool(0.3) {
        even.push((JetCoordinate::u(1), -rng.gen_range(1..=2)));
    }
    let (m, _) = Monomial::from_parts(even, odd)?;
    if let Some(d) = shape.degree {
        if m.degree() != d {
            return None;
        }
    }
    Some(m)
}

/// A random density of the given shape. Degree-constrained shapes retry a
/// bounded number of times and may come back with fewer terms.
pub fn random_density<R: Rng>(rng: &mut R, alg: Algebra, shape: &DensityShape) -> SuperPolynomial {
    let mut out = alg.zero();
    let mut tries = 0;
    let mut added = 0;
    while added < shape.terms && tries < 200 * shape.terms.max(1) {
        tries += 1;
        if let Some(m) = random_monomial(rng, alg, shape) {
            out += &alg.term(random_coefficient(rng), m);
            added += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn respects_shape() {
        let mut rng = StdRng::seed_from_u64(7);
        let shape = DensityShape { theta_degree: 2, degree: Some(3), ..Default::default() };
        for _ in 0..20 {
            let p = random_density(&mut rng, Algebra::SCALAR, &shape);
            assert!(p.has_theta_degree(2));
            assert!(p.terms().all(|(m, _)| m.degree() == 3));
        }
    }
}
