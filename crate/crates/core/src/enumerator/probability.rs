//! Error probabilities from enumerator tables.
//!
//! COMP: `P_FA = sum_{i>=1} sum_{j>=1} j/(n-i) A_{i,j} delta^i (1-delta)^{n-i}`.
//! DD:   `P_MD = sum_{a>=1} sum_{j>=1} j/a A_{a,j} delta^a (1-delta)^{n-a}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::EnumeratorTable;
use crate::combinatorics::binomial;
use crate::detection::Algorithm;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exact ensemble-average COMP false-alarm probability at prevalence `delta`.
pub fn fa_probability(table: &EnumeratorTable, delta: &BigRational) -> Result<BigRational> {
    expect_algorithm(table, Algorithm::Comp)?;
    error_probability(table, delta.clone())
}

/// Exact ensemble-average DD misdetection probability at prevalence `delta`.
pub fn md_probability(table: &EnumeratorTable, delta: &BigRational) -> Result<BigRational> {
    expect_algorithm(table, Algorithm::Dd)?;
    error_probability(table, delta.clone())
}

/// The error probability of the table's algorithm, evaluated in any scalar
/// field (exact rationals, `f64`, `f32`).
pub fn error_probability<T: Scalar>(table: &EnumeratorTable, delta: T) -> Result<T> {
    check_delta(&delta)?;
    let weights = row_weights(table)?;
    let n = table.n();
    let complement = T::one() - delta.clone();
    let mut total = T::zero();
    for (a, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let term = T::from_rational(w) * power(&delta, a) * power(&complement, n - a);
        total = total + term;
    }
    Ok(total)
}

/// Coefficients `c_0..c_n` of the error probability as a polynomial in
/// `delta`.
pub fn error_polynomial(table: &EnumeratorTable) -> Result<Vec<BigRational>> {
    let weights = row_weights(table)?;
    let n = table.n();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    for (a, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        // delta^a (1 - delta)^{n-a} = sum_t C(n-a, t) (-1)^t delta^{a+t}
        for t in 0..=(n - a) {
            let mut c = binomial((n - a) as u64, t as i64);
            if t % 2 == 1 {
                c = -c;
            }
            coeffs[a + t] += w * BigRational::from_integer(c);
        }
    }
    Ok(coeffs)
}

pub fn horner<T: Scalar>(coeffs: &[BigRational], x: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * x.clone() + T::from_rational(c))
}

/// `w_a = sum_j (j / d_a) A_{a,j}` with `d_a = n - a` (COMP) or `a` (DD).
fn row_weights(table: &EnumeratorTable) -> Result<Vec<BigRational>> {
    let n = table.n();
    let mut weights = vec![BigRational::zero(); n + 1];
    for (a, weight) in weights.iter_mut().enumerate().skip(1) {
        let (max_j, denom) = match table.algorithm {
            Algorithm::Comp => (n - a, n - a),
            Algorithm::Dd => (a, a),
        };
        for j in 1..=max_j {
            let value = table
                .values
                .get(&(a, j))
                .ok_or(Error::IncompleteTable { a, j })?;
            *weight += value * BigRational::new(BigInt::from(j), BigInt::from(denom));
        }
    }
    Ok(weights)
}

fn power<T: Scalar>(base: &T, exp: usize) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

fn check_delta<T: Scalar>(delta: &T) -> Result<()> {
    if *delta < T::zero() || *delta > T::one() {
        return Err(Error::Usage(format!(
            "prevalence {delta:?} is outside [0, 1]"
        )));
    }
    Ok(())
}

fn expect_algorithm(table: &EnumeratorTable, expected: Algorithm) -> Result<()> {
    if table.algorithm != expected {
        return Err(Error::WrongAlgorithm {
            expected: expected.name(),
            found: table.algorithm.name(),
        });
    }
    Ok(())
}
