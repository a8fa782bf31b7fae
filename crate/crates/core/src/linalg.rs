//! Exact sparse linear algebra over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::jetcore::{Monomial, SuperPolynomial};
use crate::Rational;

type Row = BTreeMap<usize, Rational>;

/// Incremental row echelon form of an augmented system `A x = b`.
///
/// Every stored row has its pivot as its smallest column, scaled to 1.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ncols: usize,
    pivots: BTreeMap<usize, (Row, Rational)>,
    inconsistent: bool,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, ..Default::default() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Add the equation `sum row[c] x_c = rhs`.
    pub fn push(&mut self, mut row: Row, mut rhs: Rational) {
        row.retain(|_, v| !v.is_zero());
        let mut cursor = 0;
        while let Some((&c, _)) = row.range(cursor..).next() {
            cursor = c + 1;
            let Some((prow, prhs)) = self.pivots.get(&c) else { continue };
            let f = row[&c].clone();
            for (&k, v) in prow {
                let e = row.entry(k).or_insert_with(Rational::zero);
                *e -= &f * v;
                if e.is_zero() {
                    row.remove(&k);
                }
            }
            rhs -= &f * prhs;
        }
        let Some((&p, _)) = row.iter().next() else {
            if !rhs.is_zero() {
                self.inconsistent = true;
            }
            return;
        };
        let inv = Rational::one() / &row[&p];
        for v in row.values_mut() {
            *v *= &inv;
        }
        rhs *= &inv;
        self.pivots.insert(p, (row, rhs));
    }

    /// Back substitution with the given values for the free columns.
    fn back_substitute(&self, free: impl Fn(usize) -> Rational, homogeneous: bool) -> Vec<Rational> {
        let mut x: Vec<Rational> = (0..self.ncols)
            .map(|c| if self.pivots.contains_key(&c) { Rational::zero() } else { free(c) })
            .collect();
        for (&p, (row, rhs)) in self.pivots.iter().rev() {
            let mut v = if homogeneous { Rational::zero() } else { rhs.clone() };
            for (&c, a) in row.range(p + 1..) {
                v -= a * &x[c];
            }
            x[p] = v;
        }
        x
    }

    /// The solution with all free variables set to zero, if consistent.
    pub fn solution(&self) -> Option<Vec<Rational>> {
        (!self.inconsistent).then(|| self.back_substitute(|_| Rational::zero(), false))
    }

    /// A basis of the kernel of the coefficient matrix, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        (0..self.ncols)
            .filter(|c| !self.pivots.contains_key(c))
            .map(|f| self.back_substitute(|c| if c == f { Rational::one() } else { Rational::zero() }, true))
            .collect()
    }
}

fn equations(images: &[Vec<SuperPolynomial>]) -> BTreeMap<(usize, Monomial), Row> {
    let mut eqs: BTreeMap<(usize, Monomial), Row> = BTreeMap::new();
    for (i, comps) in images.iter().enumerate() {
        for (j, p) in comps.iter().enumerate() {
            for (m, c) in p.terms() {
                eqs.entry((j, m.clone())).or_default().insert(i, c.clone());
            }
        }
    }
    eqs
}

/// Solve `sum_i x_i images[i] = target` componentwise. Returns the basic
/// solution (free coefficients zero), or `None` if the target is not in the span.
pub fn solve_combination(images: &[Vec<SuperPolynomial>], target: &[SuperPolynomial]) -> Option<Vec<Rational>> {
    let mut eqs = equations(images);
    let mut rhs: BTreeMap<(usize, Monomial), Rational> = BTreeMap::new();
    for (j, p) in target.iter().enumerate() {
        for (m, c) in p.terms() {
            rhs.insert((j, m.clone()), c.clone());
            eqs.entry((j, m.clone())).or_default();
        }
    }
    let mut ech = Echelon::new(images.len());
    for (key, row) in eqs {
        let b = rhs.remove(&key).unwrap_or_else(Rational::zero);
        ech.push(row, b);
    }
    ech.solution()
}

/// Basis of `{x : sum_i x_i images[i] = 0}`.
pub fn kernel_of_combination(images: &[Vec<SuperPolynomial>]) -> Vec<Vec<Rational>> {
    let mut ech = Echelon::new(images.len());
    for (_, row) in equations(images) {
        ech.push(row, Rational::zero());
    }
    ech.kernel()
}

/// `sum_i x_i basis[i]`.
pub fn combine(basis: &[SuperPolynomial], x: &[Rational], zero: SuperPolynomial) -> SuperPolynomial {
    let mut out = zero;
    for (b, c) in basis.iter().zip(x) {
        if !c.is_zero() {
            out += &b.scale(c);
        }
    }
    out
}
