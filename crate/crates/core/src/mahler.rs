//! The modified Mahler basis `m_n(z) = z^{n_0} f_1(z)^{n_1} f_2(z)^{n_2} ...`
//! built from the iterates `f_{i+1} = (f_i^p - f_i)/p`, together with its
//! change-of-basis matrices to the power basis (`Y`) and to the binomial
//! Mahler basis (`B`), and checks of their valuation estimates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GhostError, Result};
use crate::padic::{check_prime, vp_factorial, vp_rational, PDigits, Rat};
use crate::verdict::{Tally, Verdict};

/// A polynomial with exact rational coefficients, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatPoly {
    coeffs: BTreeMap<u64, BigRational>,
}

impl RatPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigRational::one())
    }

    pub fn monomial(exp: u64, c: BigRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest exponent with a nonzero coefficient; `None` for zero.
    pub fn degree(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.values().next_back()
    }

    pub fn coeff(&self, exp: u64) -> BigRational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    fn add_term(&mut self, exp: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(exp).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        let mut out = RatPoly::zero();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(*e, -c);
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> RatPoly {
        if c.is_zero() {
            return RatPoly::zero();
        }
        RatPoly {
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> RatPoly {
        let mut base = self.clone();
        let mut acc = RatPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact value at an integer point. Clears denominators first so the
    /// Horner pass runs over integers.
    pub fn eval(&self, z: &BigInt) -> BigRational {
        let Some(deg) = self.degree() else {
            return BigRational::zero();
        };
        let den = self
            .coeffs
            .values()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let mut acc = BigInt::zero();
        for e in (0..=deg).rev() {
            acc *= z;
            if let Some(c) = self.coeffs.get(&e) {
                acc += c.numer() * (&den / c.denom());
            }
        }
        BigRational::new(acc, den)
    }
}

/// The iterates `f_1, ..., f_L` for a fixed prime, computed once and then
/// shared read-only. `m_n` is assembled on demand from them.
#[derive(Clone, Debug)]
pub struct MahlerBasis {
    p: u64,
    iterates: Vec<RatPoly>,
}

impl MahlerBasis {
    /// Prepares enough iterates to build `m_n` for every `n <= n_max`.
    pub fn new(p: u64, n_max: u64) -> Result<Self> {
        check_prime(p)?;
        let depth = PDigits::new(n_max, p).len().saturating_sub(1).max(1);
        let pq = BigRational::from_integer(BigInt::from(p));
        let mut iterates = Vec::with_capacity(depth);
        let base = RatPoly::monomial(p, BigRational::one())
            .sub(&RatPoly::monomial(1, BigRational::one()))
            .scale(&pq.recip());
        iterates.push(base);
        while iterates.len() < depth {
            let prev = iterates.last().expect("nonempty");
            let next = prev.pow(p as u32).sub(prev).scale(&pq.recip());
            iterates.push(next);
        }
        Ok(Self { p, iterates })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `f_i` for `i >= 1`, extending the stored list when needed.
    pub fn iterate(&self, i: usize) -> Result<RatPoly> {
        if i == 0 {
            return Err(GhostError::InvalidArgument("iterate index starts at 1".into()));
        }
        if let Some(f) = self.iterates.get(i - 1) {
            return Ok(f.clone());
        }
        let pinv = BigRational::new(BigInt::one(), BigInt::from(self.p));
        let mut f = self.iterates.last().expect("nonempty").clone();
        for _ in self.iterates.len()..i {
            f = f.pow(self.p as u32).sub(&f).scale(&pinv);
        }
        Ok(f)
    }

    /// `m_n(z)`.
    pub fn basis_poly(&self, n: u64) -> RatPoly {
        let digits = PDigits::new(n, self.p);
        let mut out = RatPoly::monomial(digits.digit(0), BigRational::one());
        for (i, &d) in digits.digits().iter().enumerate().skip(1) {
            if d > 0 {
                let f = self.iterate(i).expect("index >= 1");
                out = out.mul(&f.pow(d as u32));
            }
        }
        out
    }

    /// `m_n(j)` via the integer recursion `f(x) = (x^p - x)/p`, independent
    /// of the polynomial expansion.
    pub fn basis_value(&self, n: u64, j: &BigInt) -> BigInt {
        let digits = PDigits::new(n, self.p);
        let mut out: BigInt = Pow::pow(j, digits.digit(0) as u32);
        let mut x = j.clone();
        for &d in digits.digits().iter().skip(1) {
            x = (Pow::pow(&x, self.p as u32) - &x) / BigInt::from(self.p);
            if d > 0 {
                out *= Pow::pow(&x, d as u32);
            }
        }
        out
    }

    /// Column `n` of `B`: the forward differences `Delta^m m_n(0)` for
    /// `m = 0..=n+1`. The last entry vanishes because `m_n` has degree `n`.
    pub fn b_column(&self, n: u64) -> Vec<BigInt> {
        let mut row: Vec<BigInt> = (0..=n + 1)
            .map(|j| self.basis_value(n, &BigInt::from(j)))
            .collect();
        let mut out = Vec::with_capacity(row.len());
        while !row.is_empty() {
            out.push(row[0].clone());
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        out
    }

    /// Column `n` of `B` recomputed from the power-basis coefficients of
    /// `m_n` using `z^m = sum_j j! S(m, j) C(z, j)`.
    pub fn b_column_via_power_basis(&self, n: u64) -> Vec<BigRational> {
        let poly = self.basis_poly(n);
        let stirling = stirling_rows(n as usize);
        let mut out = vec![BigRational::zero(); n as usize + 1];
        for (m, c) in poly.terms() {
            let mut fact = BigInt::one();
            for j in 0..=m as usize {
                if j > 0 {
                    fact *= BigInt::from(j);
                }
                let s = &stirling[m as usize][j];
                if !s.is_zero() {
                    out[j] += c * BigRational::from_integer(s * &fact);
                }
            }
        }
        out
    }

    /// Degree, exponent congruence mod `p - 1`, and the exact leading
    /// coefficient `p^{-sum_i n_i (1 + ... + p^{i-1})}`.
    pub fn shape_check(&self, n: u64) -> Verdict {
        let key = vec![self.p as i64, n as i64];
        let poly = self.basis_poly(n);
        if poly.degree() != Some(n) {
            return Verdict::fail("mahler-degree", key, format!("degree {:?}", poly.degree()));
        }
        if let Some((e, _)) = poly.terms().find(|(e, _)| !(n - e).is_multiple_of(self.p - 1)) {
            return Verdict::fail("mahler-congruence", key, format!("exponent {e}"));
        }
        let digits = PDigits::new(n, self.p);
        let mut expo = 0u64;
        let mut repunit = 0u64;
        for (i, &d) in digits.digits().iter().enumerate() {
            if i > 0 {
                repunit = repunit * self.p + 1;
            }
            expo += d * repunit;
        }
        let expected = BigRational::new(BigInt::one(), Pow::pow(&BigInt::from(self.p), expo as u32));
        let lead = poly.leading().expect("nonzero");
        if *lead != expected {
            return Verdict::fail("mahler-leading", key, format!("leading {lead}, expected p^-{expo}"));
        }
        Verdict::check(expo == vp_factorial(n, self.p), "mahler-leading", key, || {
            format!("exponent {expo} differs from v_p(n!)")
        })
    }

    /// `B` column `n` is integral (by both constructions, which must agree),
    /// vanishes below the diagonal, and has a unit diagonal entry.
    pub fn b_check(&self, n: u64) -> Verdict {
        let key = vec![self.p as i64, n as i64];
        let col = self.b_column(n);
        if !col[n as usize + 1].is_zero() {
            return Verdict::fail("mahler-b", key, "difference beyond the degree is nonzero");
        }
        if (col[n as usize].clone() % BigInt::from(self.p)).is_zero() {
            return Verdict::fail("mahler-b", key, format!("diagonal {} not a unit", col[n as usize]));
        }
        let other = self.b_column_via_power_basis(n);
        for (m, (a, b)) in col.iter().zip(&other).enumerate() {
            if !b.is_integer() || b.numer() != a {
                return Verdict::fail("mahler-b", vec![self.p as i64, m as i64, n as i64], format!("{a} vs {b}"));
            }
        }
        Verdict::Pass
    }

    /// Every entry of column `n` of `Y` against the lower bound, plus the
    /// unit check on `n! * Y_{n,n}`.
    pub fn y_column_check(&self, n: u64) -> Tally {
        let poly = self.basis_poly(n);
        let mut tally = Tally::default();
        for m in 0..=n {
            tally.add(y_verdict(self.p, m, n, &poly.coeff(m)));
        }
        tally
    }

    /// Exact triangular inversion of `Y` up to `n_max`, with each entry of
    /// the inverse checked against
    /// `v_p(n!) + floor(m/p) - floor(n/p) - floor((n-m)/(p^2-p))`.
    pub fn y_inverse_check(&self, n_max: u64) -> Tally {
        let size = n_max as usize + 1;
        let cols: Vec<RatPoly> = (0..=n_max)
            .into_par_iter()
            .map(|n| self.basis_poly(n))
            .collect();
        let y = |m: usize, n: usize| cols[n].coeff(m as u64);
        // Back substitution one column at a time: Y X = I.
        let inverse_cols: Vec<Vec<BigRational>> = (0..size)
            .into_par_iter()
            .map(|n| {
                let mut x = vec![BigRational::zero(); n + 1];
                for m in (0..=n).rev() {
                    let mut acc = if m == n { BigRational::one() } else { BigRational::zero() };
                    for (k, xk) in x.iter().enumerate().take(n + 1).skip(m + 1) {
                        if !xk.is_zero() {
                            acc -= y(m, k) * xk;
                        }
                    }
                    x[m] = acc / y(m, m);
                }
                x
            })
            .collect();
        let p = self.p;
        let mut tally = Tally::default();
        for (n, col) in inverse_cols.iter().enumerate() {
            for (m, v) in col.iter().enumerate() {
                let (m, n) = (m as u64, n as u64);
                let bound = vp_factorial(n, p) as i64 + floor_terms(p, m, n);
                let val = vp_rational(v, p);
                tally.add(Verdict::check(val >= Rat::int(bound), "mahler-y-inverse", vec![p as i64, m as i64, n as i64], || {
                    format!("v_p = {val}, bound {bound}")
                }));
            }
        }
        tally
    }
}

/// `floor(m/p) - floor(n/p) - floor((n-m)/(p^2-p))`.
fn floor_terms(p: u64, m: u64, n: u64) -> i64 {
    (m / p) as i64 - (n / p) as i64 - ((n - m) / (p * p - p)) as i64
}

/// The lower bound on `v_p(Y_{m,n})`.
pub fn y_lower_bound(p: u64, m: u64, n: u64) -> i64 {
    -(vp_factorial(m, p) as i64) + floor_terms(p, m, n)
}

fn y_verdict(p: u64, m: u64, n: u64, value: &BigRational) -> Verdict {
    let key = vec![p as i64, m as i64, n as i64];
    if !(n - m).is_multiple_of(p - 1) && !value.is_zero() {
        return Verdict::fail("mahler-y", key, format!("nonzero {value} off the congruence"));
    }
    let bound = y_lower_bound(p, m, n);
    let val = vp_rational(value, p);
    if val < Rat::int(bound) {
        return Verdict::fail("mahler-y", key, format!("v_p = {val}, bound {bound}"));
    }
    if m == n {
        let scaled = value * BigRational::from_integer(factorial(n));
        return Verdict::check(vp_rational(&scaled, p) == Rat::zero(), "mahler-y-diagonal", key, || {
            format!("n! * Y_nn = {scaled}")
        });
    }
    Verdict::Pass
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Rows `0..=n` of Stirling numbers of the second kind.
fn stirling_rows(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows = vec![vec![BigInt::one()]];
    for m in 1..=n {
        let prev = &rows[m - 1];
        let row: Vec<BigInt> = (0..=m)
            .map(|j| {
                let stay = prev.get(j).map(|s| s * BigInt::from(j)).unwrap_or_default();
                let step = if j > 0 { prev.get(j - 1).cloned().unwrap_or_default() } else { BigInt::zero() };
                stay + step
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// `f_i(z)`; `i = 0` is rejected.
pub fn f_poly(p: u64, i: usize) -> Result<RatPoly> {
    if i == 0 {
        return Err(GhostError::InvalidArgument("iterate index starts at 1".into()));
    }
    MahlerBasis::new(p, 1)?.iterate(i)
}

/// `m_n(z)`.
pub fn m_poly(p: u64, n: u64) -> Result<RatPoly> {
    Ok(MahlerBasis::new(p, n)?.basis_poly(n))
}

/// `B_{0..=n, n}`, the coordinates of `m_n` in the binomial basis.
pub fn mahler_b(p: u64, n: u64) -> Result<Vec<BigInt>> {
    let mut col = MahlerBasis::new(p, n)?.b_column(n);
    col.truncate(n as usize + 1);
    Ok(col)
}

/// `Y_{m,n}`, the coefficient of `z^m` in `m_n`.
pub fn y_entry(p: u64, m: u64, n: u64) -> Result<BigRational> {
    if m > n {
        return Err(GhostError::InvalidArgument(format!("row {m} exceeds column {n}")));
    }
    Ok(m_poly(p, n)?.coeff(m))
}

pub fn y_bound_check(p: u64, m: u64, n: u64) -> Result<Verdict> {
    let value = y_entry(p, m, n)?;
    Ok(y_verdict(p, m, n, &value))
}

/// Evaluates `m_n` at seeded integers in `[0, p^{ceil(log_p n) + 2})` and
/// checks every value is `p`-integral.
pub fn integrality_check(p: u64, n: u64, samples: usize) -> Result<Verdict> {
    let basis = MahlerBasis::new(p, n)?;
    let poly = basis.basis_poly(n);
    let mut e = 0u32;
    while (p as u128).pow(e) < n as u128 {
        e += 1;
    }
    let hi = (p as u128).pow(e + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(p.wrapping_mul(1_000_003) ^ n);
    let pz = BigInt::from(p);
    for _ in 0..samples {
        let z = BigInt::from(rng.gen_range(0..hi));
        let v = poly.eval(&z);
        if (v.denom() % &pz).is_zero() {
            return Ok(Verdict::fail("mahler-integrality", vec![p as i64, n as i64], format!("m_n({z}) = {v}")));
        }
    }
    Ok(Verdict::Pass)
}

/// Everything checked for the basis up to the given sizes, in parallel.
pub fn mahler_suite(p: u64, y_max: u64, b_max: u64, shape_max: u64, inverse_max: u64) -> Result<Tally> {
    let top = y_max.max(b_max).max(shape_max).max(inverse_max);
    let basis = MahlerBasis::new(p, top)?;
    let shapes: Tally = (0..=shape_max).into_par_iter().map(|n| basis.shape_check(n)).collect::<Vec<_>>().into_iter().collect();
    let bs: Tally = (0..=b_max).into_par_iter().map(|n| basis.b_check(n)).collect::<Vec<_>>().into_iter().collect();
    let ys = (0..=y_max)
        .into_par_iter()
        .map(|n| basis.y_column_check(n))
        .reduce(Tally::default, Tally::merge);
    let inv = basis.y_inverse_check(inverse_max);
    Ok(shapes.merge(bs).merge(ys).merge(inv))
}
