//! Exact computer algebra for the variational calculus of bihamiltonian
//! structures on jet space.
//!
//! The crate is organised bottom-up:
//!
//! * [`jetcore`]: the superalgebra of differential polynomials and the total derivative;
//! * [`variational`]: variational derivatives, the normalization operator and
//!   canonical representatives of functional multivectors;
//! * [`schouten`]: the Schouten bracket and Hamiltonian/compatibility checks;
//! * [`deform`]: epsilon-deformations, obstruction cocycles and the bicomplex;
//! * [`dkdv`]: the dispersionless KdV pencil and its quasi-trivialization.
//!
//! All arithmetic is exact over the rationals.

pub mod binomial;
pub mod deform;
pub mod dkdv;
pub mod error;
pub mod jetcore;
pub mod linalg;
pub mod random;
pub mod schouten;
pub mod variational;

pub use error::{Error, Result};
pub use jetcore::{Algebra, Coordinate, DiffOperator, JetCoordinate, Monomial, OddCoordinate, SuperPolynomial};

/// Exact rational coefficients.
pub type Rational = num_rational::BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
