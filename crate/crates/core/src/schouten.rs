//! The Schouten bracket of functional multivectors and what is built on it.

use crate::error::{Error, Result};
use crate::jetcore::{Algebra, DiffOperator, JetCoordinate, SuperPolynomial};
use crate::variational::{delta_theta, delta_u, operator_to_bivector, MultiVector, OperatorMatrix};
use crate::{rat, Rational};

pub use self::bracket as schouten_bracket;
pub use self::d_h as differential_dh;

/// `[[F, G]] = int sum_alpha (-1)^{p+1} dF/dtheta_alpha dG/du^alpha - dF/du^alpha dG/dtheta_alpha`
/// where `p` is the theta-degree of `F`.
pub fn bracket(f: &MultiVector, g: &MultiVector) -> Result<MultiVector> {
    let alg = f.algebra();
    alg.compatible(&g.algebra())?;
    let p = f.theta_degree();
    let k = p + g.theta_degree();
    if k == 0 {
        return Ok(MultiVector::zero(alg, 0));
    }
    let sign = if p % 2 == 0 { -1 } else { 1 };
    let mut dens = alg.zero();
    for alpha in 1..=alg.q {
        let a = &delta_theta(f.rep(), alpha) * &delta_u(g.rep(), alpha);
        let b = &delta_u(f.rep(), alpha) * &delta_theta(g.rep(), alpha);
        dens += &a.scale_int(sign);
        dens -= &b;
    }
    MultiVector::from_density_with_degree(&dens, k - 1)
}

/// The differential `d_H = [[H, .]]` of a Hamiltonian bivector.
pub fn d_h(h: &MultiVector, f: &MultiVector) -> Result<MultiVector> {
    if h.theta_degree() != 2 {
        return Err(Error::WrongThetaDegree { expected: 2, found: h.theta_degree() });
    }
    bracket(h, f)
}

/// `[[P, P]] = 0`.
pub fn is_hamiltonian(p: &MultiVector) -> Result<bool> {
    if p.theta_degree() != 2 {
        return Err(Error::WrongThetaDegree { expected: 2, found: p.theta_degree() });
    }
    Ok(bracket(p, p)?.is_zero())
}

/// `[[P, Q]] = 0`.
pub fn are_compatible(p: &MultiVector, q: &MultiVector) -> Result<bool> {
    Ok(bracket(p, q)?.is_zero())
}

/// The Poisson bracket `{F, G} = int dF/du^alpha D^{alpha beta} dG/du^beta` of
/// two local functionals.
pub fn poisson_bracket_functionals(d: &OperatorMatrix, f: &MultiVector, g: &MultiVector) -> Result<MultiVector> {
    if f.theta_degree() != 0 || g.theta_degree() != 0 {
        return Err(Error::WrongThetaDegree { expected: 0, found: f.theta_degree().max(g.theta_degree()) });
    }
    let alg = d.algebra();
    let df: Vec<_> = (1..=alg.q).map(|a| delta_u(f.rep(), a)).collect();
    let dg: Vec<_> = (1..=alg.q).map(|a| delta_u(g.rep(), a)).collect();
    let ddg = d.apply(&dg);
    let mut dens = alg.zero();
    for (x, y) in df.iter().zip(&ddg) {
        dens += &(x * y);
    }
    MultiVector::from_density_with_degree(&dens, 0)
}

/// A pair of compatible Hamiltonian bivectors.
#[derive(Clone, Debug)]
pub struct Pencil {
    p: MultiVector,
    q: MultiVector,
}

impl Pencil {
    pub fn new(p: MultiVector, q: MultiVector) -> Result<Self> {
        if !is_hamiltonian(&p)? {
            return Err(Error::Precondition("first bivector is not Hamiltonian".into()));
        }
        if !is_hamiltonian(&q)? {
            return Err(Error::Precondition("second bivector is not Hamiltonian".into()));
        }
        if !are_compatible(&p, &q)? {
            return Err(Error::Precondition("bivectors are not compatible".into()));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &MultiVector {
        &self.p
    }

    pub fn q(&self) -> &MultiVector {
        &self.q
    }

    /// `a P + b Q`.
    pub fn combination(&self, a: &Rational, b: &Rational) -> MultiVector {
        &self.p.scale(a) + &self.q.scale(b)
    }
}

type Matrix = Vec<Vec<SuperPolynomial>>;

fn determinant(m: &Matrix, alg: Algebra) -> SuperPolynomial {
    let n = m.len();
    if n == 0 {
        return alg.one();
    }
    let mut out = alg.zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor = minor_of(m, 0, j);
        let term = &m[0][j] * &determinant(&minor, alg);
        if j % 2 == 0 {
            out += &term;
        } else {
            out -= &term;
        }
    }
    out
}

fn minor_of(m: &Matrix, r: usize, c: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Inverse of a polynomial matrix with nonzero constant determinant.
fn inverse(m: &Matrix, alg: Algebra) -> Result<Matrix> {
    let det = determinant(m, alg);
    let c = det
        .as_constant()
        .filter(|c| *c != Rational::from_integer(0.into()))
        .ok_or_else(|| Error::DegenerateMetric(format!("determinant {det} is not a nonzero constant")))?;
    let n = m.len();
    let inv_det = Rational::from_integer(1.into()) / c;
    let mut out = vec![vec![alg.zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let cof = determinant(&minor_of(m, j, i), alg);
            let s = if (i + j) % 2 == 0 { inv_det.clone() } else { -inv_det.clone() };
            out[i][j] = cof.scale(&s);
        }
    }
    Ok(out)
}

/// A hydrodynamic-type bivector `h^{ab} d + Gamma^{ab}_c u^c_1` built from a
/// contravariant metric depending on the order-zero fields.
#[derive(Clone, Debug)]
pub struct Hydrodynamic {
    pub metric: Matrix,
    /// `gamma[a][b][c] = Gamma^{ab}_c`, 0-based.
    pub gamma: Vec<Vec<Vec<SuperPolynomial>>>,
    /// `curvature[r][s][m][n] = R^r_{smn}` of the covariant metric.
    pub curvature: Vec<Vec<Vec<Vec<SuperPolynomial>>>>,
    pub operator: OperatorMatrix,
    pub bivector: MultiVector,
}

impl Hydrodynamic {
    /// Whether every curvature component vanishes.
    pub fn is_flat(&self) -> bool {
        self.curvature.iter().flatten().flatten().flatten().all(|x| x.is_zero())
    }
}

/// Build the hydrodynamic bivector of a contravariant metric `h`.
///
/// For a single component `Gamma = h'/2`. For several components `det h`
/// must be a nonzero constant so that the covariant metric is polynomial.
pub fn hydrodynamic_bivector(alg: Algebra, h: &Matrix) -> Result<Hydrodynamic> {
    let q = alg.q as usize;
    if h.len() != q || h.iter().any(|r| r.len() != q) {
        return Err(Error::BadIndex(format!("metric must be {q}x{q}")));
    }
    for (i, row) in h.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            alg.compatible(&x.algebra())?;
            if x.depends_on_order_at_least(1) || !x.is_theta_free() {
                return Err(Error::Precondition("metric entries must depend on order-zero fields only".into()));
            }
            if *x != h[j][i] {
                return Err(Error::DegenerateMetric("metric is not symmetric".into()));
            }
        }
    }
    let d = |x: &SuperPolynomial, c: usize| x.partial_u(JetCoordinate::new(c as u16 + 1, 0));
    let (gamma, curvature) = if q == 1 {
        if h[0][0].is_zero() {
            return Err(Error::DegenerateMetric("metric is zero".into()));
        }
        (vec![vec![vec![d(&h[0][0], 0).scale(&rat(1, 2))]]], vec![vec![vec![vec![alg.zero()]]]])
    } else {
        let g = inverse(h, alg)?;
        // Christoffel symbols of the covariant metric g: chr[b][s][c] = Gamma^b_{sc}
        let mut chr = vec![vec![vec![alg.zero(); q]; q]; q];
        for b in 0..q {
            for s in 0..q {
                for c in 0..q {
                    let mut acc = alg.zero();
                    for l in 0..q {
                        let t = &(&d(&g[l][c], s) + &d(&g[l][s], c)) - &d(&g[s][c], l);
                        acc += &(&h[b][l] * &t);
                    }
                    chr[b][s][c] = acc.scale(&rat(1, 2));
                }
            }
        }
        let mut gamma = vec![vec![vec![alg.zero(); q]; q]; q];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let mut acc = alg.zero();
                    for s in 0..q {
                        acc -= &(&h[a][s] * &chr[b][s][c]);
                    }
                    gamma[a][b][c] = acc;
                }
            }
        }
        let mut curv = vec![vec![vec![vec![alg.zero(); q]; q]; q]; q];
        for r in 0..q {
            for s in 0..q {
                for m in 0..q {
                    for n in 0..q {
                        let mut acc = &d(&chr[r][n][s], m) - &d(&chr[r][m][s], n);
                        for l in 0..q {
                            acc += &(&chr[r][m][l] * &chr[l][n][s]);
                            acc -= &(&chr[r][n][l] * &chr[l][m][s]);
                        }
                        curv[r][s][m][n] = acc;
                    }
                }
            }
        }
        (gamma, curv)
    };
    let mut entries = Vec::new();
    for a in 0..q {
        let mut row = Vec::new();
        for b in 0..q {
            let mut c0 = alg.zero();
            for c in 0..q {
                c0 += &(&gamma[a][b][c] * &alg.u_alpha(c as u16 + 1, 1));
            }
            row.push(DiffOperator::new(alg, vec![c0, h[a][b].clone()])?);
        }
        entries.push(row);
    }
    let operator = OperatorMatrix::new(alg, entries)?;
    let bivector = operator_to_bivector(&operator)?;
    Ok(Hydrodynamic { metric: h.clone(), gamma, curvature, operator, bivector })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, DensityShape};
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

    #[test]
    fn kdv_pencil() {
        assert!(is_hamiltonian(&p_biv()).unwrap());
        assert!(is_hamiltonian(&q_biv()).unwrap());
        assert!(are_compatible(&p_biv(), &q_biv()).unwrap());
        assert!(Pencil::new(p_biv(), q_biv()).is_ok());
        // every scalar hydrodynamic bivector is Hamiltonian
        let h2 = mv(&(&A.u(0).pow(2) * &A.theta(0)) * &A.theta(1));
        assert!(is_hamiltonian(&h2).unwrap());
    }

    #[test]
    fn d_p_is_minus_theta_one_times_euler() {
        let f = mv(A.u(0).pow(3));
        let dpf = d_h(&p_biv(), &f).unwrap();
        let expected = mv((&A.theta(1) * &A.u(0).pow(2)).scale_int(-3));
        assert_eq!(dpf, expected);
    }

    #[test]
    fn poisson_bracket_matches_double_bracket() {
        let d = OperatorMatrix::scalar(DiffOperator::del_power(A, 1));
        let f = mv(A.u(0).pow(3));
        let g = mv(&A.u(0) * &A.u(1).pow(2));
        let pb = poisson_bracket_functionals(&d, &f, &g).unwrap();
        let dbl = bracket(&bracket(&p_biv(), &f).unwrap(), &g).unwrap();
        assert_eq!(pb, -&dbl);
        let gf = poisson_bracket_functionals(&d, &g, &f).unwrap();
        assert_eq!(pb, -&gf);
    }

    #[test]
    fn scalar_hydrodynamic() {
        let h = vec![vec![A.u(0)]];
        let hy = hydrodynamic_bivector(A, &h).unwrap();
        assert_eq!(hy.bivector, q_biv());
        assert_eq!(hy.gamma[0][0][0], A.ratio(1, 2));
    }

    fn two() -> Algebra {
        Algebra::new(2, false).unwrap()
    }

    #[test]
    fn flat_two_component_metric() {
        let a = two();
        let h = vec![vec![a.zero(), a.one()], vec![a.one(), a.u_alpha(1, 0)]];
        let hy = hydrodynamic_bivector(a, &h).unwrap();
        assert!(hy.is_flat());
        assert!(hy.operator.is_skew_adjoint());
        assert!(is_hamiltonian(&hy.bivector).unwrap());
    }

    #[test]
    fn curvature_and_hamiltonian_property_agree() {
        let a = two();
        let v = a.u_alpha(2, 0);
        let h = vec![vec![a.one(), v.clone()], vec![v.clone(), &a.one() + &v.pow(2)]];
        let hy = hydrodynamic_bivector(a, &h).unwrap();
        assert!(hy.operator.is_skew_adjoint());
        assert_eq!(hy.is_flat(), is_hamiltonian(&hy.bivector).unwrap());
        assert!(!hy.is_flat());
        let degenerate = vec![vec![a.u_alpha(1, 0), a.zero()], vec![a.zero(), a.one()]];
        assert!(matches!(hydrodynamic_bivector(a, &degenerate), Err(Error::DegenerateMetric(_))));
    }

    fn random_mv(rng: &mut StdRng, k: usize) -> MultiVector {
        let shape = DensityShape { theta_degree: k, max_order: 2, max_factors: 2, terms: 2, degree: None };
        MultiVector::from_density_with_degree(&random_density(rng, A, &shape), k).unwrap()
    }

    fn sign(e: i64) -> Rational {
        if e.rem_euclid(2) == 0 {
            rat(1, 1)
        } else {
            rat(-1, 1)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn graded_skew_symmetry(seed in any::<u64>(), p in 0usize..4, q in 0usize..4) {
            let mut rng = StdRng::seed_from_u64(seed);
            let f = random_mv(&mut rng, p);
            let g = random_mv(&mut rng, q);
            let fg = bracket(&f, &g).unwrap();
            let gf = bracket(&g, &f).unwrap();
            let e = (p as i64 - 1) * (q as i64 - 1);
            prop_assert_eq!(fg, gf.scale(&-sign(e)));
        }

        #[test]
        fn graded_jacobi(seed in any::<u64>(), p in 0usize..3, q in 0usize..3, r in 1usize..3) {
            let mut rng = StdRng::seed_from_u64(seed);
            let f = random_mv(&mut rng, p);
            let g = random_mv(&mut rng, q);
            let h = random_mv(&mut rng, r);
            let lhs = bracket(&f, &bracket(&g, &h).unwrap()).unwrap();
            let a = bracket(&bracket(&f, &g).unwrap(), &h).unwrap();
            let b = bracket(&g, &bracket(&f, &h).unwrap()).unwrap();
            let e = (p as i64 - 1) * (q as i64 - 1);
            prop_assert_eq!(lhs, &a + &b.scale(&sign(e)));
        }

        #[test]
        fn d_p_squares_to_zero(seed in any::<u64>(), k in 0usize..3) {
            let mut rng = StdRng::seed_from_u64(seed);
            let f = random_mv(&mut rng, k);
            for h in [p_biv(), q_biv()] {
                let dd = d_h(&h, &d_h(&h, &f).unwrap()).unwrap();
                prop_assert!(dd.is_zero());
            }
        }
    }
}
