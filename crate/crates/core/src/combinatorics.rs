//! Exact binomials, multinomials and rational helpers.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for t in 0..k {
        acc *= n - t;
        acc /= t + 1;
    }
    BigInt::from(acc)
}

/// `n! / prod(parts!)`, computed as a product of binomials.
pub fn multinomial(n: u64, parts: &[u64]) -> Result<BigInt> {
    let sum: u64 = parts.iter().sum();
    if sum != n {
        return Err(Error::PartsSum { total: n, sum });
    }
    let mut remaining = n;
    let mut acc = BigInt::one();
    for &p in parts {
        acc *= binomial(remaining, p as i64);
        remaining -= p;
    }
    Ok(acc)
}

/// Eagerly built Pascal triangle; read-only after construction, so it can be
/// shared across threads.
#[derive(Debug, Clone)]
pub struct BinomialCache {
    rows: Vec<Vec<BigInt>>,
}

impl BinomialCache {
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max_n + 1);
        for n in 0..=max_n {
            let mut row = Vec::with_capacity(n + 1);
            for k in 0..=n {
                if k == 0 || k == n {
                    row.push(BigInt::one());
                } else {
                    let prev = &rows[n - 1];
                    row.push(&prev[k - 1] + &prev[k]);
                }
            }
            rows.push(row);
        }
        BinomialCache { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// `C(n, k)`, falling back to direct evaluation beyond the cached range.
    pub fn get(&self, n: u64, k: i64) -> BigInt {
        if k < 0 || k as u64 > n {
            return BigInt::zero();
        }
        match self.rows.get(n as usize) {
            Some(row) => row[k as usize].clone(),
            None => binomial(n, k),
        }
    }

    pub fn multinomial(&self, n: u64, parts: &[u64]) -> Result<BigInt> {
        let sum: u64 = parts.iter().sum();
        if sum != n {
            return Err(Error::PartsSum { total: n, sum });
        }
        let mut remaining = n;
        let mut acc = BigInt::one();
        for &p in parts {
            acc *= self.get(remaining, p as i64);
            remaining -= p;
        }
        Ok(acc)
    }
}

/// `0!, 1!, ..., max!`.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<BigInt>,
}

impl FactorialTable {
    pub fn new(max: usize) -> Self {
        let mut values = Vec::with_capacity(max + 1);
        values.push(BigInt::one());
        for k in 1..=max {
            let next = &values[k - 1] * BigInt::from(k);
            values.push(next);
        }
        FactorialTable { values }
    }

    #[inline]
    pub fn get(&self, k: usize) -> &BigInt {
        &self.values[k]
    }
}

/// `n!` for small `n` as an exact integer, saturating at `u128::MAX`.
pub fn factorial_saturating(n: u64) -> u128 {
    (1..=n as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}

pub fn lcm_up_to(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)))
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.05"` into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Usage(format!("cannot parse `{text}` as a rational number"));
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Renders `value` in plain positional notation rounded (half away from
/// zero) to `significant` significant digits. Never uses exponents or digit
/// grouping.
pub fn to_decimal(value: &BigRational, significant: usize) -> String {
    let significant = significant.max(1);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let abs = value.abs();
    let ten = BigInt::from(10);

    // Decimal exponent e with 10^e <= abs < 10^(e+1).
    let bits = abs.numer().bits() as i64 - abs.denom().bits() as i64;
    let mut e = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while pow10(e) > abs {
        e -= 1;
    }
    while pow10(e + 1) <= abs {
        e += 1;
    }

    let shift = significant as i64 - 1 - e;
    let scaled = &abs * pow10(shift);
    let mut digits = round_half_up(&scaled);
    let mut shift = shift;
    if digits == num_traits::pow(ten.clone(), significant) {
        digits /= &ten;
        shift -= 1;
    }

    let mut text = digits.to_string();
    if shift <= 0 {
        text.push_str(&"0".repeat((-shift) as usize));
    } else {
        let shift = shift as usize;
        if text.len() <= shift {
            text = format!("{}{}", "0".repeat(shift - text.len() + 1), text);
        }
        let split = text.len() - shift;
        let (int_part, frac_part) = text.split_at(split);
        let frac_part = frac_part.trim_end_matches('0');
        text = if frac_part.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        };
    }
    if negative {
        text.insert(0, '-');
    }
    text
}

fn round_half_up(value: &BigRational) -> BigInt {
    let (q, r) = value.numer().div_rem(value.denom());
    let twice: BigInt = &r * 2u32;
    match twice.cmp(value.denom()) {
        Ordering::Less => q,
        _ => q + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Pascal recurrence on machine integers; independent of `binomial`.
    fn pascal(n: usize) -> Vec<Vec<u128>> {
        let mut rows = vec![vec![1u128]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![1u128; i + 1];
            for k in 1..i {
                row[k] = prev[k - 1] + prev[k];
            }
            rows.push(row);
        }
        rows
    }

    fn fact(n: u64) -> u128 {
        (1..=n as u128).product()
    }

    #[test]
    fn binomial_examples() {
        let p = pascal(30);
        assert_eq!(p[30][3], 4060);
        assert_eq!(binomial(30, 3), BigInt::from(4060));
        assert_eq!(binomial(5, 0), BigInt::one());
        assert_eq!(binomial(4, 7), BigInt::zero());
        assert_eq!(binomial(4, -1), BigInt::zero());
        for n in 0..=30u64 {
            for k in 0..=n {
                assert_eq!(
                    binomial(n, k as i64),
                    BigInt::from(p[n as usize][k as usize])
                );
            }
        }
    }

    #[test]
    fn binomial_row_sums() {
        for n in 0..=64u64 {
            let sum: BigInt = (0..=n as i64).map(|k| binomial(n, k)).sum();
            assert_eq!(sum, BigInt::one() << n as usize);
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(4, &[2, 2]).unwrap(), BigInt::from(6));
        let oracle = fact(6) / (fact(1) * fact(2) * fact(3));
        assert_eq!(oracle, 60);
        assert_eq!(multinomial(6, &[1, 2, 3]).unwrap(), BigInt::from(60));
        assert_eq!(multinomial(3, &[3]).unwrap(), BigInt::one());
        assert!(matches!(
            multinomial(5, &[1, 2]),
            Err(Error::PartsSum { total: 5, sum: 3 })
        ));
    }

    #[test]
    fn multinomial_matches_factorials() {
        let facts = FactorialTable::new(40);
        for parts in [[3u64, 5, 7, 0], [10, 10, 10, 10], [1, 0, 0, 12]] {
            let n: u64 = parts.iter().sum();
            let mut expected = facts.get(n as usize).clone();
            for p in parts {
                expected /= facts.get(p as usize);
            }
            assert_eq!(multinomial(n, &parts).unwrap(), expected);
        }
    }

    #[test]
    fn cache_agrees_with_direct() {
        let cache = BinomialCache::new(50);
        assert_eq!(cache.max_n(), 50);
        for n in 0..=60u64 {
            for k in -1..=(n as i64 + 1) {
                assert_eq!(cache.get(n, k), binomial(n, k));
            }
        }
        assert_eq!(
            cache.multinomial(90, &[30, 30, 30]).unwrap(),
            multinomial(90, &[30, 30, 30]).unwrap()
        );
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rational(1, 3), 5), "0.33333");
        assert_eq!(to_decimal(&rational(2, 3), 3), "0.667");
        assert_eq!(to_decimal(&rational(0, 1), 12), "0");
        assert_eq!(to_decimal(&rational(4060, 1), 12), "4060");
        assert_eq!(to_decimal(&rational(4060, 1), 2), "4100");
        assert_eq!(to_decimal(&rational(-1, 8), 12), "-0.125");
        assert_eq!(to_decimal(&rational(1, 1000), 3), "0.001");
        assert_eq!(to_decimal(&rational(999, 1000), 2), "1");
        assert_eq!(to_decimal(&rational(95, 1000), 1), "0.1");
        assert_eq!(to_decimal(&rational(1, 1), 12), "1");
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("0.05").unwrap(), rational(1, 20));
        assert_eq!(parse_rational("3").unwrap(), rational(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rational(-1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn lcm_small() {
        assert_eq!(lcm_up_to(6), BigInt::from(60));
        assert_eq!(lcm_up_to(1), BigInt::one());
    }
}
