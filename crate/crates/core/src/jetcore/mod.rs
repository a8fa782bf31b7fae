//! Exact arithmetic in the jet superalgebra: differential polynomials in
//! `u^alpha_k` with odd generators `theta_{alpha,k}`, optionally Laurent in
//! `u_1` (hat mode), together with scalar differential operators.

mod monomial;
mod operator;
mod poly;

pub use monomial::{Coordinate, JetCoordinate, Monomial, OddCoordinate};
pub use operator::DiffOperator;
pub use poly::{Algebra, GradingInfo, SuperPolynomial};
