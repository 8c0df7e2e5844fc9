//! The local datum, classical dimension formulas, power-basis degrees and the
//! ghost coefficients as explicit zero multisets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GhostError, Result};
use crate::padic::check_prime;

/// The reduced local datum `(p, a, b, s)` together with its derived constants.
///
/// `b` only relabels the character; every slope computation uses `(p, a, s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GhostContext {
    p: i64,
    a: i64,
    b: i64,
    s: i64,
    k_eps: i64,
    delta: i64,
    t1: i64,
    t2: i64,
}

/// How the ghost series of a context relates to that of its companion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompanionRelation {
    /// Identical coefficients.
    Equal,
    /// `G = 1 + t * G'`: coefficient `n + 1` here is coefficient `n` of the companion.
    ShiftUp,
    /// `G' = 1 + t * G`: coefficient `n + 1` of the companion is coefficient `n` here.
    ShiftDown,
}

/// `g_n` as a map from weight `k` to the multiplicity of the zero `w_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhostCoefficient {
    pub n: u64,
    pub zeros: BTreeMap<i64, u32>,
    pub degree: u64,
}

impl GhostCoefficient {
    pub fn multiplicity(&self, k: i64) -> u32 {
        self.zeros.get(&k).copied().unwrap_or(0)
    }
}

/// Residue in `[0, m)`.
pub(crate) fn rem(x: i64, m: i64) -> i64 {
    x.rem_euclid(m)
}

/// Floor division rounding toward negative infinity.
pub(crate) fn fdiv(x: i64, m: i64) -> i64 {
    x.div_euclid(m)
}

/// Least `x >= 0` with `f(x) >= target`, for nondecreasing `f`.
fn first_reaching(target: i64, f: impl Fn(i64) -> i64) -> i64 {
    if f(0) >= target {
        return 0;
    }
    let mut hi = 1;
    while f(hi) < target {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // f(lo) < target <= f(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

impl GhostContext {
    pub fn new(p: u64, a: i64, b: i64, s: i64) -> Result<Self> {
        check_prime(p)?;
        let p = p as i64;
        if !(1..=p - 4).contains(&a) {
            return Err(GhostError::InvalidContext(format!("a = {a} outside [1, {}]", p - 4)));
        }
        if !(0..=p - 2).contains(&b) {
            return Err(GhostError::InvalidContext(format!("b = {b} outside [0, {}]", p - 2)));
        }
        if !(0..=p - 2).contains(&s) {
            return Err(GhostError::InvalidContext(format!("s = {s} outside [0, {}]", p - 2)));
        }
        let k_eps = 2 + rem(a + 2 * s, p - 1);
        let as_ = rem(a + s, p - 1);
        let delta = (s + as_) / (p - 1);
        let (t1, t2) = if a + s < p - 1 {
            (s + delta, a + s + delta + 2)
        } else {
            (as_ + delta + 1, s + delta + 1)
        };
        Ok(GhostContext { p, a, b, s, k_eps, delta, t1, t2 })
    }

    pub fn p(&self) -> i64 {
        self.p
    }
    pub fn a(&self) -> i64 {
        self.a
    }
    pub fn b(&self) -> i64 {
        self.b
    }
    pub fn s(&self) -> i64 {
        self.s
    }
    pub fn k_eps(&self) -> i64 {
        self.k_eps
    }
    pub fn delta(&self) -> i64 {
        self.delta
    }
    pub fn t1(&self) -> i64 {
        self.t1
    }
    pub fn t2(&self) -> i64 {
        self.t2
    }

    /// Residue mod `p - 1` in `[0, p - 2]`.
    pub fn braces(&self, x: i64) -> i64 {
        rem(x, self.p - 1)
    }

    /// Whether the datum lies in the range where the slope statements are
    /// theorems rather than expectations.
    pub fn very_generic(&self) -> bool {
        self.p >= 11 && (2..=self.p - 5).contains(&self.a)
    }

    /// Exponents `(i, j)` of the character `omega^i x omega^j`.
    pub fn character_exponents(&self) -> (i64, i64) {
        (self.braces(self.b - self.s), self.braces(self.a + self.s + self.b))
    }

    /// Same datum with a different `s`.
    pub fn with_s(&self, s: i64) -> Result<Self> {
        GhostContext::new(self.p as u64, self.a, self.b, s)
    }

    /// `k_bullet = (k - k_eps) / (p - 1)` for `k` on the weight disk.
    pub fn kbullet(&self, k: i64) -> Result<i64> {
        if k < 2 {
            return Err(GhostError::WeightBelowTwo(k));
        }
        let step = self.p - 1;
        if k < self.k_eps || rem(k - self.k_eps, step) != 0 {
            return Err(GhostError::NotOnDisk { k, k_eps: self.k_eps, step });
        }
        Ok((k - self.k_eps) / step)
    }

    pub fn weight(&self, kb: i64) -> i64 {
        self.k_eps + (self.p - 1) * kb
    }

    /// Iwahori-level dimension at an arbitrary weight `k >= 2`.
    pub fn d_iw(&self, k: i64) -> Result<i64> {
        if k < 2 {
            return Err(GhostError::WeightBelowTwo(k));
        }
        let m = self.p - 1;
        Ok(fdiv(k - 2 - self.s, m) + fdiv(k - 2 - self.braces(self.a + self.s), m) + 2)
    }

    /// Iwahori-level dimension on the disk, via the closed form in `k_bullet`.
    pub fn d_iw_self(&self, k: i64) -> Result<i64> {
        Ok(self.d_iw_kb(self.kbullet(k)?))
    }

    pub fn d_ur(&self, k: i64) -> Result<i64> {
        Ok(self.d_ur_kb(self.kbullet(k)?))
    }

    pub fn d_new(&self, k: i64) -> Result<i64> {
        let kb = self.kbullet(k)?;
        Ok(self.d_iw_kb(kb) - 2 * self.d_ur_kb(kb))
    }

    pub(crate) fn d_iw_kb(&self, kb: i64) -> i64 {
        2 * kb + 2 - 2 * self.delta
    }

    pub(crate) fn d_ur_kb(&self, kb: i64) -> i64 {
        let q = self.p + 1;
        fdiv(kb - self.t1, q) + fdiv(kb - self.t2, q) + 2
    }

    /// `m_n(k)` indexed by `k_bullet`.
    pub(crate) fn mult_kb(&self, n: i64, kb: i64) -> i64 {
        let ur = self.d_ur_kb(kb);
        let iw = self.d_iw_kb(kb);
        if ur < n && n < iw - ur {
            (n - ur).min(iw - ur - n)
        } else {
            0
        }
    }

    pub fn multiplicity(&self, n: u64, k: i64) -> Result<u64> {
        if n == 0 {
            return Err(GhostError::IndexOutOfRange { index: 0, lo: 1, hi: i64::MAX });
        }
        let kb = self.kbullet(k)?;
        Ok(self.mult_kb(n as i64, kb) as u64)
    }

    /// Half-open `k_bullet` range `[lo, hi)` carrying every zero of `g_n`.
    ///
    /// Both `d_ur` and `d_iw - d_ur` are nondecreasing in `k_bullet`, so the
    /// zero set is an interval: it starts where `d_iw - d_ur` first exceeds
    /// `n` and stops where `d_ur` first reaches `n`.
    pub fn zero_window(&self, n: u64) -> (i64, i64) {
        let n = n as i64;
        let lo = first_reaching(n + 1, |kb| self.d_iw_kb(kb) - self.d_ur_kb(kb));
        let hi = first_reaching(n, |kb| self.d_ur_kb(kb));
        (lo, hi.max(lo))
    }

    pub fn ghost_coefficient(&self, n: u64) -> Result<GhostCoefficient> {
        if n == 0 {
            return Err(GhostError::IndexOutOfRange { index: 0, lo: 1, hi: i64::MAX });
        }
        let (lo, hi) = self.zero_window(n);
        let mut zeros = BTreeMap::new();
        let mut degree = 0u64;
        for kb in lo..hi {
            let m = self.mult_kb(n as i64, kb);
            if m > 0 {
                zeros.insert(self.weight(kb), m as u32);
                degree += m as u64;
            }
        }
        Ok(GhostCoefficient { n, zeros, degree })
    }

    /// `deg g_n`, with `deg g_0 = 0`.
    pub fn ghost_degree(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let (lo, hi) = self.zero_window(n);
        (lo..hi).map(|kb| self.mult_kb(n as i64, kb) as u64).sum()
    }

    /// Degree of the `n`-th power-basis element: the `n`-th smallest member of
    /// the union of `s + (p-1)i` and `{a+s} + (p-1)i`.
    pub fn power_basis_degree(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(GhostError::IndexOutOfRange { index: 0, lo: 1, hi: i64::MAX });
        }
        let other = self.braces(self.a + self.s);
        let (small, large) = (self.s.min(other), self.s.max(other));
        let n = n as i64;
        let deg = if n % 2 == 1 {
            small + (self.p - 1) * (n - 1) / 2
        } else {
            large + (self.p - 1) * (n / 2 - 1)
        };
        Ok(deg as u64)
    }

    /// `lambda_n = deg e_n - floor(deg e_n / p)`.
    pub fn hodge_slope(&self, n: u64) -> Result<u64> {
        let d = self.power_basis_degree(n)?;
        Ok(d - d / self.p as u64)
    }

    pub fn companion(&self) -> Result<GhostContext> {
        let a2 = self.p - 3 - self.a;
        if !(1..=self.p - 4).contains(&a2) {
            return Err(GhostError::InvalidContext(format!(
                "companion exponent {a2} is not generic"
            )));
        }
        GhostContext::new(
            self.p as u64,
            a2,
            self.braces(self.a + self.b + 1),
            self.braces(self.a + self.s + 1),
        )
    }

    pub fn companion_relation(&self) -> CompanionRelation {
        if self.s == 0 {
            CompanionRelation::ShiftUp
        } else if self.s == self.p - 2 - self.a {
            CompanionRelation::ShiftDown
        } else {
            CompanionRelation::Equal
        }
    }

    /// Index `n'` with `g_n` here equal to `g_{n'}` of the companion, using
    /// the convention `g_0 = 1`.
    pub fn companion_index(&self, n: u64) -> u64 {
        match self.companion_relation() {
            CompanionRelation::Equal => n,
            CompanionRelation::ShiftUp => n - 1,
            CompanionRelation::ShiftDown => n + 1,
        }
    }
}
