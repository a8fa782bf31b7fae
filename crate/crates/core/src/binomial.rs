use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::Rational;

/// `C(n, k)` for integer `n >= 0`; zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub fn binomial_rational(n: i64, k: i64) -> Rational {
    Rational::from_integer(binomial(n, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal_rows() {
        for n in 1..20i64 {
            for k in 1..n {
                assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
            }
        }
        assert_eq!(binomial(5, 3), BigInt::from(10));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(3, -1), BigInt::zero());
    }
}
