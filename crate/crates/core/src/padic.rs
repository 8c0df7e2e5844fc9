//! Exact rationals extended by an infinity sentinel, p-adic valuations of
//! integers and rationals, and base-p digit statistics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GhostError, Result};

/// An element of the rationals extended by a single `Infinity` that sorts
/// above every finite value and absorbs addition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rat {
    Finite(BigRational),
    Infinity,
}

impl Rat {
    pub fn zero() -> Self {
        Rat::Finite(BigRational::zero())
    }

    pub fn int(n: i64) -> Self {
        Rat::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`, reduced. Panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        Rat::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Rat::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            Rat::Finite(q) => Some(q),
            Rat::Infinity => None,
        }
    }

    /// The finite value; panics on infinity.
    pub fn expect_finite(&self) -> &BigRational {
        self.as_finite().expect("finite rational expected")
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Rat::Finite(q) if q.is_integer())
    }

    pub fn min(self, other: Rat) -> Rat {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl From<BigRational> for Rat {
    fn from(q: BigRational) -> Self {
        Rat::Finite(q)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rat::Infinity, Rat::Infinity) => Ordering::Equal,
            (Rat::Infinity, _) => Ordering::Greater,
            (_, Rat::Infinity) => Ordering::Less,
            (Rat::Finite(a), Rat::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        match (self, rhs) {
            (Rat::Finite(a), Rat::Finite(b)) => Rat::Finite(a + b),
            _ => Rat::Infinity,
        }
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        &self + &rhs
    }
}

/// `Infinity - finite = Infinity`. Subtracting infinity is undefined and panics.
impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        match (self, rhs) {
            (Rat::Finite(a), Rat::Finite(b)) => Rat::Finite(a - b),
            (Rat::Infinity, Rat::Finite(_)) => Rat::Infinity,
            (_, Rat::Infinity) => panic!("cannot subtract infinity"),
        }
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        &self - &rhs
    }
}

/// Scaling by a nonnegative rational; `Infinity * 0` panics.
impl Mul<&BigRational> for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &BigRational) -> Rat {
        match self {
            Rat::Finite(a) => Rat::Finite(a * rhs),
            Rat::Infinity => {
                assert!(rhs.is_positive(), "infinity times a non-positive scalar");
                Rat::Infinity
            }
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Finite(a) => Rat::Finite(-a),
            Rat::Infinity => panic!("negative infinity is not representable"),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Infinity => write!(f, "inf"),
            Rat::Finite(q) => write!(f, "{}/{}", q.numer(), q.denom()),
        }
    }
}

impl FromStr for Rat {
    type Err = GhostError;

    /// Accepts `inf`, an integer, or `num/den` with a nonzero denominator.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || GhostError::ParseRational(s.to_string());
        if t.eq_ignore_ascii_case("inf") {
            return Ok(Rat::Infinity);
        }
        match t.split_once('/') {
            None => {
                let n: BigInt = t.parse().map_err(|_| bad())?;
                Ok(Rat::Finite(BigRational::from_integer(n)))
            }
            Some((a, b)) => {
                let n: BigInt = a.trim().parse().map_err(|_| bad())?;
                let d: BigInt = b.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rat::Finite(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for a finite big rational `num/den`.
pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integral big rational.
pub fn qi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Trial-division primality test; inputs here are small primes.
pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if p >= 5 && is_prime(p as i64) {
        Ok(())
    } else {
        Err(GhostError::BadPrime(p as i64))
    }
}

/// Largest `e` with `p^e | n`.
pub fn vp_int(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(GhostError::ZeroValuation);
    }
    let p = p as i128;
    let mut n = n;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

pub fn vp_bigint(n: &BigInt, p: u64) -> Result<u64> {
    if n.is_zero() {
        return Err(GhostError::ZeroValuation);
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (quo, rem) = n.div_rem(&p);
        if !rem.is_zero() {
            return Ok(e);
        }
        n = quo;
        e += 1;
    }
}

/// `v_p` of a rational, with `v_p(0) = Infinity`.
pub fn vp_rational(x: &BigRational, p: u64) -> Rat {
    if x.is_zero() {
        return Rat::Infinity;
    }
    let num = vp_bigint(x.numer(), p).expect("nonzero numerator") as i64;
    let den = vp_bigint(x.denom(), p).expect("nonzero denominator") as i64;
    Rat::int(num - den)
}

/// Base-p expansion of a nonnegative integer, little-endian, with no stored
/// trailing zeros (so zero has no digits).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PDigits {
    base: u64,
    digits: Vec<u64>,
}

impl PDigits {
    pub fn new(n: u64, p: u64) -> Self {
        let mut digits = Vec::new();
        let mut n = n;
        while n > 0 {
            digits.push(n % p);
            n /= p;
        }
        PDigits { base: p, digits }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// The `i`-th digit, zero beyond the stored length.
    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn value(&self) -> u64 {
        self.digits.iter().rev().fold(0, |acc, &d| acc * self.base + d)
    }
}

/// Digit sum of `n` in base `p`.
pub fn dig(n: u64, p: u64) -> u64 {
    PDigits::new(n, p).digits().iter().sum()
}

/// `v_p(n!) = (n - dig(n)) / (p - 1)`.
pub fn vp_factorial(n: u64, p: u64) -> u64 {
    (n - dig(n, p)) / (p - 1)
}

/// `v_p` of the binomial coefficient `C(m, r)`, counted as the number of
/// carries when adding `r` and `m - r` in base `p`.
pub fn vp_binomial(m: u64, r: u64, p: u64) -> Result<u64> {
    if r > m {
        return Err(GhostError::BinomialRange { m, r });
    }
    let (mut x, mut y) = (r, m - r);
    let mut carry = 0;
    let mut carries = 0;
    while x > 0 || y > 0 || carry > 0 {
        let s = x % p + y % p + carry;
        carry = u64::from(s >= p);
        carries += carry;
        x /= p;
        y /= p;
    }
    Ok(carries)
}

/// Number of positions `i >= 0` where the `(i+1)`-th base-p digit of `n`
/// exceeds the `i`-th digit of `m`.
pub fn shifted_digit_excess(m: u64, n: u64, p: u64) -> u64 {
    let md = PDigits::new(m, p);
    let nd = PDigits::new(n, p);
    (0..nd.len().saturating_sub(1))
        .filter(|&i| nd.digit(i + 1) > md.digit(i))
        .count() as u64
}

fn digit_columns(values: &[u64], p: u64) -> (Vec<PDigits>, usize) {
    let expanded: Vec<PDigits> = values.iter().map(|&v| PDigits::new(v, p)).collect();
    let width = expanded.iter().map(PDigits::len).max().unwrap_or(0);
    (expanded, width)
}

fn count_at_most(values: &[PDigits], j: usize, alpha: u64) -> i64 {
    values.iter().filter(|d| d.digit(j) <= alpha).count() as i64
}

/// Tuple version of [`shifted_digit_excess`] using zero-digit counts:
/// `sum_j max(#{i: lambda_i has digit 0 at j} - #{i: eta_i has digit 0 at j+1}, 0)`.
///
/// Both arguments are lists of degrees (not indices).
pub fn tuple_shifted_excess(lambda: &[u64], eta: &[u64], p: u64) -> Result<u64> {
    tuple_excess_with(lambda, eta, p, 0..=0)
}

/// Threshold tuple version: at each digit position the maximum over
/// `alpha in 0..=p-2` of the "digit at most alpha" count differences.
/// Always at least [`tuple_shifted_excess`].
pub fn tuple_threshold_excess(lambda: &[u64], eta: &[u64], p: u64) -> Result<u64> {
    tuple_excess_with(lambda, eta, p, 0..=p - 2)
}

fn tuple_excess_with(
    lambda: &[u64],
    eta: &[u64],
    p: u64,
    thresholds: std::ops::RangeInclusive<u64>,
) -> Result<u64> {
    if lambda.len() != eta.len() {
        return Err(GhostError::SizeMismatch {
            left: lambda.len(),
            right: eta.len(),
        });
    }
    let (l, lw) = digit_columns(lambda, p);
    let (e, ew) = digit_columns(eta, p);
    let width = lw.max(ew);
    let mut total = 0u64;
    for j in 0..=width {
        let best = thresholds
            .clone()
            .map(|alpha| count_at_most(&l, j, alpha) - count_at_most(&e, j + 1, alpha))
            .max()
            .unwrap_or(0)
            .max(0);
        total += best as u64;
    }
    Ok(total)
}

/// Integer floor of `log_p(x)` for `x >= 1`, by exact comparison.
pub fn floor_log(x: u128, p: u64) -> u32 {
    assert!(x >= 1);
    let p = p as u128;
    let mut e = 0;
    let mut pw = p;
    while pw <= x {
        e += 1;
        pw = match pw.checked_mul(p) {
            Some(v) => v,
            None => break,
        };
    }
    e
}

/// Converts a finite rational to `f64`; used only for reporting.
pub fn to_f64(q: &BigRational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// `floor(q)` as a big integer.
pub fn floor_rat(q: &BigRational) -> BigInt {
    q.floor().to_integer()
}

/// Smallest nonnegative residue of `q` modulo one, i.e. `q - floor(q)`.
pub fn frac_part(q: &BigRational) -> BigRational {
    q - q.floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vp_by_division(mut n: i128, p: i128) -> u32 {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        e
    }

    fn vp_factorial_by_product(n: u64, p: u64) -> u64 {
        (1..=n).map(|i| vp_int(i as i128, p).unwrap() as u64).sum()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(vp_int(18, 7).unwrap(), 0);
        assert_eq!(vp_int(49, 7).unwrap(), 2);
        assert_eq!(vp_int(6 * 343, 7).unwrap(), vp_by_division(6 * 343, 7));
        assert_eq!(vp_int(6 * 343, 7).unwrap(), 3);
        assert_eq!(vp_int(0, 7), Err(GhostError::ZeroValuation));
        assert_eq!(vp_int(-98, 7).unwrap(), 2);
    }

    #[test]
    fn digit_sums() {
        assert_eq!(dig(0, 7), 0);
        assert_eq!(dig(49, 7), 1);
        // 54 = 5 + 0*7 + 1*49
        assert_eq!(PDigits::new(54, 7).digits(), &[5, 0, 1]);
        assert_eq!(dig(54, 7), 6);
    }

    #[test]
    fn factorial_valuations() {
        assert_eq!(vp_factorial(7, 7), 1);
        assert_eq!(vp_factorial(0, 7), 0);
        assert_eq!(vp_factorial_by_product(100, 7), 16);
        assert_eq!(vp_factorial(100, 7), 16);
    }

    #[test]
    fn binomial_valuations() {
        assert_eq!(vp_binomial(7, 1, 7).unwrap(), 1);
        assert_eq!(vp_binomial(30, 0, 7).unwrap(), 0);
        let via_factorials = vp_factorial(49, 7) - vp_factorial(7, 7) - vp_factorial(42, 7);
        // 7 + 42 in base 7 is [0,1] + [0,6]: a single carry.
        assert_eq!(via_factorials, 1);
        assert_eq!(vp_binomial(49, 7, 7).unwrap(), 1);
        assert!(vp_binomial(3, 4, 7).is_err());
    }

    #[test]
    fn shifted_excess_examples() {
        assert_eq!(shifted_digit_excess(123, 0, 7), 0);
        assert_eq!(shifted_digit_excess(6, 49, 7), 1);
        assert_eq!(shifted_digit_excess(0, 7, 7), 1);
    }

    #[test]
    fn tuple_excess_single_element() {
        // The threshold version reduces to the scalar count on singletons.
        for m in 0..400u64 {
            for n in [0u64, 1, 6, 7, 15, 50, 343, 400, m] {
                assert_eq!(
                    tuple_threshold_excess(&[m], &[n], 7).unwrap(),
                    shifted_digit_excess(m, n, 7)
                );
                assert!(tuple_shifted_excess(&[m], &[n], 7).unwrap() <= shifted_digit_excess(m, n, 7));
            }
        }
        assert!(tuple_shifted_excess(&[1, 2], &[3], 7).is_err());
    }

    // Direct double loop over digit positions and thresholds.
    fn tuple_oracle(lambda: &[u64], eta: &[u64], p: u64, thresholds: &[u64]) -> u64 {
        let digit = |v: u64, j: u32| (v / p.pow(j)) % p;
        let mut total = 0i64;
        for j in 0..12u32 {
            let mut best = 0i64;
            for &alpha in thresholds {
                let a = lambda.iter().filter(|&&v| digit(v, j) <= alpha).count() as i64;
                let b = eta.iter().filter(|&&v| digit(v, j + 1) <= alpha).count() as i64;
                best = best.max(a - b);
            }
            total += best;
        }
        total as u64
    }

    #[test]
    fn tuple_three_element_instance() {
        let lambda = [2, 9, 50];
        let eta = [14, 49, 100];
        let zero_only = tuple_oracle(&lambda, &eta, 7, &[0]);
        let all = tuple_oracle(&lambda, &eta, 7, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(tuple_shifted_excess(&lambda, &eta, 7).unwrap(), zero_only);
        assert_eq!(tuple_threshold_excess(&lambda, &eta, 7).unwrap(), all);
        assert_eq!((zero_only, all), (1, 1));
        // 21 = [0, 3] in base 7: the digit 3 exceeds 2 but neither is zero.
        assert_eq!(tuple_shifted_excess(&[2], &[21], 7).unwrap(), 0);
        assert_eq!(tuple_threshold_excess(&[2], &[21], 7).unwrap(), 1);
    }

    #[test]
    fn rat_ordering_and_parsing() {
        assert!(Rat::Infinity > Rat::int(1_000_000));
        assert_eq!(&Rat::Infinity + &Rat::int(3), Rat::Infinity);
        assert_eq!("3/6".parse::<Rat>().unwrap(), Rat::frac(1, 2));
        assert_eq!("inf".parse::<Rat>().unwrap(), Rat::Infinity);
        assert_eq!(Rat::int(13).to_string(), "13/1");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
        assert_eq!(vp_rational(&q(-1, 7), 7), Rat::int(-1));
        assert_eq!(vp_rational(&qi(0), 7), Rat::Infinity);
    }

    #[test]
    fn floor_log_exact() {
        assert_eq!(floor_log(1, 7), 0);
        assert_eq!(floor_log(6, 7), 0);
        assert_eq!(floor_log(7, 7), 1);
        assert_eq!(floor_log(48, 7), 1);
        assert_eq!(floor_log(49, 7), 2);
    }

    proptest! {
        #[test]
        fn rat_display_round_trips(n in -10_000i64..10_000, d in 1i64..500) {
            let r = Rat::frac(n, d);
            prop_assert_eq!(r.to_string().parse::<Rat>().unwrap(), r);
        }

        #[test]
        fn digits_round_trip(n in 0u64..1_000_000, pi in 0usize..4) {
            let p = [5u64, 7, 11, 13][pi];
            let d = PDigits::new(n, p);
            prop_assert_eq!(d.value(), n);
            prop_assert!(d.digits().last().is_none_or(|&x| x != 0));
            prop_assert!(d.digits().iter().all(|&x| x < p));
        }

        #[test]
        fn factorial_recurrence(n in 0u64..10_000, pi in 0usize..3) {
            let p = [5u64, 7, 11][pi];
            prop_assert_eq!(vp_factorial(n, p), n / p + vp_factorial(n / p, p));
            if n >= p {
                prop_assert!(vp_factorial(n, p) > p * vp_factorial(n / p, p));
            }
        }

        #[test]
        fn binomial_matches_factorials(m in 0u64..5_000, r in 0u64..5_000, pi in 0usize..3) {
            let p = [5u64, 7, 11][pi];
            prop_assume!(r <= m);
            let expect = vp_factorial(m, p) - vp_factorial(r, p) - vp_factorial(m - r, p);
            prop_assert_eq!(vp_binomial(m, r, p).unwrap(), expect);
        }

        #[test]
        fn shifted_excess_step_bounds(m in 0u64..10_000, n in 0u64..10_000, pi in 0usize..3) {
            let p = [5u64, 7, 11][pi];
            prop_assert!(shifted_digit_excess(m + 1, n, p) + 1 >= shifted_digit_excess(m, n, p));
            for c in 1..=p {
                prop_assert!(shifted_digit_excess(m, n, p) + 1 >= shifted_digit_excess(m, n + c, p));
            }
        }

        #[test]
        fn binomial_dominates_excess(m in 0u64..10_000, n in 0u64..10_000, pi in 0usize..3) {
            let p = [5u64, 7, 11][pi];
            prop_assume!(m >= n / p);
            prop_assert!(vp_binomial(m, m - n / p, p).unwrap() >= shifted_digit_excess(m, n, p));
        }

        #[test]
        fn factorial_ratio_bound(n in 1u64..5_000, gap in 2u64..400, pi in 0usize..3) {
            let p = [5u64, 7, 11][pi];
            let m = n + gap;
            let gamma = (n + 1..=m).map(|i| vp_int(i as i128, p).unwrap() as u64).max().unwrap();
            let lhs = vp_factorial(m, p) - vp_factorial(n, p);
            prop_assert!(lhs <= gamma + (gap - 2) / (p - 1));
        }

        #[test]
        fn threshold_dominates_zero_count(
            lambda in proptest::collection::vec(0u64..3_000, 1..6),
            shift in proptest::collection::vec(0u64..3_000, 6),
            pi in 0usize..3,
        ) {
            let p = [5u64, 7, 11][pi];
            let eta: Vec<u64> = shift[..lambda.len()].to_vec();
            let d = tuple_shifted_excess(&lambda, &eta, p).unwrap();
            let dd = tuple_threshold_excess(&lambda, &eta, p).unwrap();
            prop_assert!(dd >= d);
        }
    }
}
