//! Checkers for slope identities and bounds of ghost Newton polygons, plus
//! the index-set combinatorics of the Atkin-Lehner pairing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{GhostError, Result};
use crate::ghost::GhostContext;
use crate::newton::NewtonPolygon;
use crate::padic::{q, qi, to_f64, vp_int, Rat};
use crate::series::GhostSeries;
use crate::verdict::Verdict;
use crate::weight::WeightPoint;

/// A finite set of positive indices, kept strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IndexSet(Vec<u64>);

impl IndexSet {
    pub fn new(mut items: Vec<u64>) -> Result<Self> {
        items.sort_unstable();
        if items.first() == Some(&0) {
            return Err(GhostError::InvalidArgument("indices start at 1".into()));
        }
        if items.windows(2).any(|w| w[0] == w[1]) {
            return Err(GhostError::InvalidArgument("indices must be distinct".into()));
        }
        Ok(IndexSet(items))
    }

    /// `{1, ..., n}`.
    pub fn initial(n: u64) -> Self {
        IndexSet((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u64) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    /// Sum of the power-basis degrees over the set.
    pub fn degree(&self, ctx: &GhostContext) -> Result<u64> {
        self.iter().map(|i| ctx.power_basis_degree(i)).sum()
    }
}

/// Corank data `(r, s, m)` of a minor with rows `zeta` and columns `xi` at
/// weight `k`: `r` counts classical columns sent into the rows by the
/// Atkin-Lehner pairing, `s` counts non-classical columns, and
/// `m = n - d_ur - r - s` bounds the corank from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorankBound {
    pub paired: u64,
    pub nonclassical: u64,
    pub corank: i64,
}

pub fn corank_bound(ctx: &GhostContext, zeta: &IndexSet, xi: &IndexSet, k: i64) -> Result<CorankBound> {
    if zeta.len() != xi.len() {
        return Err(GhostError::SizeMismatch { left: zeta.len(), right: xi.len() });
    }
    let d = ctx.d_iw_self(k)? as u64;
    let ur = ctx.d_ur(k)?;
    let paired = xi.iter().filter(|&i| i <= d && zeta.contains(d + 1 - i)).count() as u64;
    let nonclassical = xi.iter().filter(|&i| i > d).count() as u64;
    Ok(CorankBound {
        paired,
        nonclassical,
        corank: xi.len() as i64 - ur - paired as i64 - nonclassical as i64,
    })
}

/// Antidiagonal of the Atkin-Lehner matrix on the classical power basis:
/// entry `l` is the valuation `k - 2 - deg e_l` of the coefficient sending
/// `e_l` to the `(d + 1 - l)`-th basis element of the swapped character.
pub fn al_matrix(ctx: &GhostContext, k: i64) -> Result<Vec<i64>> {
    let d = ctx.d_iw(k)?;
    (1..=d as u64).map(|l| Ok(k - 2 - ctx.power_basis_degree(l)? as i64)).collect()
}

fn swapped_character(ctx: &GhostContext, k: i64) -> Result<GhostContext> {
    ctx.with_s(ctx.braces(k - 2 - ctx.a() - ctx.s()))
}

/// Composing the pairing with its swap multiplies by exactly `p^(k-2)`.
pub fn al_involution_check(ctx: &GhostContext, k: i64) -> Result<Verdict> {
    let here = al_matrix(ctx, k)?;
    let there = al_matrix(&swapped_character(ctx, k)?, k)?;
    let key = vec![ctx.p(), ctx.a(), ctx.s(), k];
    if here.len() != there.len() {
        return Ok(Verdict::fail("pairing dimension", key, format!("{} vs {}", here.len(), there.len())));
    }
    let d = here.len();
    for l in 0..d {
        let (x, y) = (here[l], there[d - 1 - l]);
        if x < 0 || x + y != k - 2 {
            return Ok(Verdict::fail("pairing valuation", key, format!("entry {} gives {x} + {y}", l + 1)));
        }
    }
    Ok(Verdict::Pass)
}

/// Slopes `1..=count` of the ghost polygon at the classical point `w_k`.
fn classical_slopes(ctx: &GhostContext, k: i64, count: usize) -> Result<Vec<BigRational>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    Ok(GhostSeries::shared(ctx).ghost_np(&WeightPoint::classical(k), count)?.slopes())
}

/// The `(d + l)`-th slope at `w_{k0}` is `k0 - 1` plus the `l`-th slope at
/// `w_{2 - k0}` for the twisted character, `d` the classical dimension.
pub fn theta_check(ctx: &GhostContext, k0: i64, count: usize) -> Result<Verdict> {
    if k0 < 2 {
        return Err(GhostError::WeightBelowTwo(k0));
    }
    let d = ctx.d_iw(k0)? as usize;
    let here = classical_slopes(ctx, k0, d + count)?;
    theta_with(ctx, k0, &here, count)
}

fn theta_with(ctx: &GhostContext, k0: i64, here: &[BigRational], count: usize) -> Result<Verdict> {
    if count == 0 {
        return Ok(Verdict::Pass);
    }
    let d = ctx.d_iw(k0)? as usize;
    let twisted = ctx.with_s(ctx.braces(ctx.s() + 1 - k0))?;
    let there = classical_slopes(&twisted, 2 - k0, count)?;
    for l in 0..count {
        if here[d + l] != &there[l] + qi(k0 - 1) {
            return Ok(Verdict::fail(
                "theta shift",
                vec![ctx.p(), ctx.a(), ctx.s(), k0, l as i64 + 1],
                format!("slope {} vs {} + {}", here[d + l], k0 - 1, there[l]),
            ));
        }
    }
    Ok(Verdict::Pass)
}

/// At a weight off the disk, slope `l` here and slope `d - l + 1` for the
/// swapped character add to `k0 - 1`, for `l <= min(d, count)`.
pub fn al_check(ctx: &GhostContext, k0: i64, count: usize) -> Result<Verdict> {
    if k0 < 2 {
        return Err(GhostError::WeightBelowTwo(k0));
    }
    let d = ctx.d_iw(k0)? as usize;
    let here = classical_slopes(ctx, k0, d)?;
    al_with(ctx, k0, &here, count)
}

fn al_with(ctx: &GhostContext, k0: i64, here: &[BigRational], count: usize) -> Result<Verdict> {
    if ctx.kbullet(k0).is_ok() {
        return Err(GhostError::InvalidArgument(format!(
            "weight {k0} lies on the disk; use the p-stabilization check"
        )));
    }
    let d = ctx.d_iw(k0)? as usize;
    let upto = d.min(count);
    if upto == 0 {
        return Ok(Verdict::Pass);
    }
    let swapped = swapped_character(ctx, k0)?;
    let there = classical_slopes(&swapped, k0, d)?;
    for l in 0..upto {
        let sum = &here[l] + &there[d - 1 - l];
        if sum != qi(k0 - 1) {
            return Ok(Verdict::fail(
                "Atkin-Lehner pairing",
                vec![ctx.p(), ctx.a(), ctx.s(), k0, l as i64 + 1],
                format!("{} + {} = {sum}", here[l], there[d - 1 - l]),
            ));
        }
    }
    Ok(Verdict::Pass)
}

/// On the disk, slopes `l` and `d - l + 1` add to `k0 - 1` for
/// `l <= min(d_ur, count)`.
pub fn pstab_check(ctx: &GhostContext, k0: i64, count: usize) -> Result<Verdict> {
    ctx.kbullet(k0)?;
    let d = ctx.d_iw(k0)? as usize;
    let slopes = classical_slopes(ctx, k0, d)?;
    pstab_with(ctx, k0, &slopes, count)
}

fn pstab_with(ctx: &GhostContext, k0: i64, slopes: &[BigRational], count: usize) -> Result<Verdict> {
    ctx.kbullet(k0)?;
    let d = ctx.d_iw(k0)? as usize;
    let upto = (ctx.d_ur(k0)? as usize).min(count);
    for l in 0..upto {
        let sum = &slopes[l] + &slopes[d - 1 - l];
        if sum != qi(k0 - 1) {
            return Ok(Verdict::fail(
                "p-stabilization pairing",
                vec![ctx.p(), ctx.a(), ctx.s(), k0, l as i64 + 1],
                format!("{} + {} = {sum}", slopes[l], slopes[d - 1 - l]),
            ));
        }
    }
    Ok(Verdict::Pass)
}

/// The theta shift for `theta_count` slopes, then the full pairing identity
/// that applies at `k0` (p-stabilization on the disk, Atkin-Lehner off it),
/// sharing one polygon computation.
pub fn compatibility_checks(ctx: &GhostContext, k0: i64, theta_count: usize) -> Result<[Verdict; 2]> {
    if k0 < 2 {
        return Err(GhostError::WeightBelowTwo(k0));
    }
    let d = ctx.d_iw(k0)? as usize;
    let here = classical_slopes(ctx, k0, d + theta_count)?;
    let theta = theta_with(ctx, k0, &here, theta_count)?;
    let pairing = if ctx.kbullet(k0).is_ok() {
        pstab_with(ctx, k0, &here, usize::MAX)?
    } else {
        al_with(ctx, k0, &here, usize::MAX)?
    };
    Ok([theta, pairing])
}

/// The two bounds on the first `d_ur` slopes at `w_{k0}`: the refined one
/// built from `t1`, `t2`, and the floor bound it implies.
pub fn gouvea_bounds(ctx: &GhostContext, k0: i64) -> Result<Option<(BigRational, i64)>> {
    let ur = ctx.d_ur(k0)?;
    if ur == 0 {
        return Ok(None);
    }
    let p = ctx.p();
    let n = ur - 1;
    let beta = if n % 2 == 0 { qi(ctx.t1()) } else { qi(ctx.t2()) - q(p + 1, 2) };
    let refined = q((p - 1) * n, 2) - qi(ctx.delta()) + beta;
    let floor = (k0 - 1 - (ctx.a() + 1).min(p - 2 - ctx.a())).div_euclid(p + 1);
    Ok(Some((refined, floor)))
}

pub fn gouvea_bound_check(ctx: &GhostContext, k0: i64) -> Result<Verdict> {
    let Some((refined, floor)) = gouvea_bounds(ctx, k0)? else {
        return Ok(Verdict::Pass);
    };
    let key = vec![ctx.p(), ctx.a(), ctx.s(), ctx.kbullet(k0)?];
    if refined > qi(floor) {
        return Ok(Verdict::fail("Gouvea bound chain", key, format!("{refined} exceeds {floor}")));
    }
    let slopes = classical_slopes(ctx, k0, ctx.d_ur(k0)? as usize)?;
    match slopes.iter().position(|s| *s > refined) {
        Some(i) => Ok(Verdict::fail(
            "Gouvea bound",
            key,
            format!("slope {} = {} exceeds {refined}", i + 1, slopes[i]),
        )),
        None => Ok(Verdict::Pass),
    }
}

/// Slopes of the polygon at `w_k` up to and including `bound`.
pub fn slopes_up_to(series: &GhostSeries, k: i64, bound: &BigRational) -> Result<Vec<BigRational>> {
    let w = WeightPoint::classical(k);
    let mut count = 8usize;
    loop {
        let np = series.ghost_np(&w, count)?;
        let slopes = np.slopes();
        if slopes.last().is_some_and(|s| s > bound) {
            return Ok(slopes.into_iter().filter(|s| s <= bound).collect());
        }
        count *= 2;
    }
}

/// Slopes at `w_{k1}` and `w_{k2}` agree up to `m - 4` when the weights are
/// `p^m`-adically close.
pub fn gm_check(ctx: &GhostContext, k1: i64, k2: i64, m: i64) -> Result<Verdict> {
    if m < 4 {
        return Ok(Verdict::inapplicable("m below 4"));
    }
    if k1.min(k2) < m - 2 {
        return Ok(Verdict::inapplicable("weights too small for m"));
    }
    let (Ok(kb1), Ok(kb2)) = (ctx.kbullet(k1), ctx.kbullet(k2)) else {
        return Ok(Verdict::inapplicable("weights off the disk"));
    };
    if k1 != k2 && (vp_int((k1 - k2) as i128, ctx.p() as u64)? as i64) < m {
        return Ok(Verdict::inapplicable("weights not close enough"));
    }
    let series = GhostSeries::shared(ctx);
    let bound = qi(m - 4);
    let a = slopes_up_to(&series, k1, &bound)?;
    let b = slopes_up_to(&series, k2, &bound)?;
    let (lo, hi) = if kb1 <= kb2 { (kb1, kb2) } else { (kb2, kb1) };
    Ok(Verdict::check(a == b, "slope agreement", vec![ctx.p(), ctx.a(), ctx.s(), m, lo, hi], || {
        format!("{} slopes vs {} slopes below {bound}", a.len(), b.len())
    }))
}

/// Slope statistics of the classical block at `w_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeStats {
    pub p: i64,
    pub k: i64,
    pub d_ur: i64,
    pub d_iw: i64,
    /// The first `d_iw` slopes, ascending.
    pub slopes: Vec<BigRational>,
}

/// Distribution function of the limit measure: uniform mass `1/(p+1)` on
/// each of `[0, 1/(p+1)]` and `[p/(p+1), 1]`, the rest at `1/2`.
/// With `left`, the limit from the left is returned.
pub fn limit_cdf(p: i64, x: &BigRational, left: bool) -> BigRational {
    let q1 = qi(p + 1);
    let clamp = |t: BigRational| t.max(BigRational::zero()).min(BigRational::one());
    let mut f = clamp(x * &q1) / &q1 + clamp(x * &q1 - qi(p)) / &q1;
    let half = q(1, 2);
    if *x > half || (*x == half && !left) {
        f += q(p - 1, p + 1);
    }
    f
}

impl SlopeStats {
    /// Largest deviation of an outer slope from its linear model, with the
    /// index where it occurs: slope `i <= d_ur` against `(p-1) i / 2`, and
    /// slope `d_iw + 1 - i` against `k - 1 - (p-1) i / 2`.
    pub fn outer_drift(&self) -> (usize, f64) {
        let (ur, iw) = (self.d_ur as usize, self.d_iw as usize);
        let mut worst = (0, 0.0f64);
        for i in 1..=ur {
            let model = q((self.p - 1) * i as i64, 2);
            let low = to_f64(&(&self.slopes[i - 1] - &model)).abs();
            let high = to_f64(&(&self.slopes[iw - i] - (qi(self.k - 1) - &model))).abs();
            let d = low.max(high);
            if d > worst.1 {
                worst = (i, d);
            }
        }
        worst
    }

    /// Slopes divided by `k - 1`.
    pub fn normalized(&self) -> Vec<BigRational> {
        let d = qi(self.k - 1);
        self.slopes.iter().map(|s| s / &d).collect()
    }

    /// Masses of the normalized slopes in `bins` equal cells of `[0, 1]`.
    pub fn histogram(&self, bins: usize) -> Vec<BigRational> {
        let mut h = vec![BigRational::zero(); bins];
        if self.slopes.is_empty() || bins == 0 {
            return h;
        }
        let unit = q(1, self.slopes.len() as i64);
        for x in self.normalized() {
            let cell = (x * BigInt::from(bins as u64)).floor().to_integer();
            let i = usize::try_from(cell).unwrap_or(0).min(bins - 1);
            h[i] += &unit;
        }
        h
    }

    /// `(x, F_k(x-), F_k(x))` at each distinct normalized slope.
    fn atoms(&self) -> Vec<(BigRational, BigRational, BigRational)> {
        let xs = self.normalized();
        let n = qi(xs.len() as i64);
        let mut out = Vec::new();
        let mut i = 0;
        while i < xs.len() {
            let mut j = i;
            while j < xs.len() && xs[j] == xs[i] {
                j += 1;
            }
            out.push((xs[i].clone(), qi(i as i64) / &n, qi(j as i64) / &n));
            i = j;
        }
        out
    }

    /// Empirical distribution function and its left limit at `x`, given the
    /// sorted normalized slopes.
    fn empirical(xs: &[BigRational], x: &BigRational) -> (BigRational, BigRational) {
        let n = qi(xs.len() as i64);
        let below = xs.partition_point(|v| v < x) as i64;
        let upto = xs.partition_point(|v| v <= x) as i64;
        (qi(below) / &n, qi(upto) / &n)
    }

    /// Exact sup distance between distribution functions, or `None` without slopes.
    pub fn kolmogorov_distance(&self) -> Option<BigRational> {
        if self.slopes.is_empty() {
            return None;
        }
        let mut best = BigRational::zero();
        let mut consider = |emp: BigRational, lim: BigRational| {
            let d = (emp - lim).abs();
            if d > best {
                best = d;
            }
        };
        for (x, before, at) in self.atoms() {
            consider(before, limit_cdf(self.p, &x, true));
            consider(at, limit_cdf(self.p, &x, false));
        }
        let half = q(1, 2);
        let (before, at) = Self::empirical(&self.normalized(), &half);
        consider(before, limit_cdf(self.p, &half, true));
        consider(at, limit_cdf(self.p, &half, false));
        Some(best)
    }

    /// Exact `W1` distance, the integral of `|F_k - F|` over `[0, 1]`.
    pub fn wasserstein_distance(&self) -> Option<BigRational> {
        if self.slopes.is_empty() {
            return None;
        }
        let p = self.p;
        let xs = self.normalized();
        let mut cuts = vec![BigRational::zero(), BigRational::one(), q(1, p + 1), q(1, 2), q(p, p + 1)];
        cuts.extend(xs.iter().filter(|&x| *x >= BigRational::zero() && *x <= BigRational::one()).cloned());
        cuts.sort();
        cuts.dedup();
        let mut total = BigRational::zero();
        for w in cuts.windows(2) {
            let (u, v) = (&w[0], &w[1]);
            let c = Self::empirical(&xs, u).1;
            let g0 = limit_cdf(p, u, false) - &c;
            let g1 = limit_cdf(p, v, true) - &c;
            let len = v - u;
            let area = if (g0.is_negative() && g1.is_positive()) || (g0.is_positive() && g1.is_negative()) {
                &len * (&g0 * &g0 + &g1 * &g1) / (qi(2) * (g0.abs() + g1.abs()))
            } else {
                &len * (g0.abs() + g1.abs()) / qi(2)
            };
            total += area;
        }
        Some(total)
    }
}

pub fn distribution(ctx: &GhostContext, k: i64) -> Result<SlopeStats> {
    let d_iw = ctx.d_iw_self(k)?;
    Ok(SlopeStats {
        p: ctx.p(),
        k,
        d_ur: ctx.d_ur(k)?,
        d_iw,
        slopes: classical_slopes(ctx, k, d_iw as usize)?,
    })
}

/// Middle block exactly `(k-2)/2`; outer slopes within `slack * log_p k` of
/// `(p-1) i / 2`, mirrored through `k - 1` above the middle block.
pub fn distribution_check(ctx: &GhostContext, k: i64, slack: f64) -> Result<Verdict> {
    let stats = distribution(ctx, k)?;
    let key = vec![ctx.p(), ctx.a(), ctx.s(), ctx.kbullet(k)?];
    let (ur, iw) = (stats.d_ur as usize, stats.d_iw as usize);
    let middle = q(k - 2, 2);
    if let Some(i) = (ur..iw - ur).find(|&i| stats.slopes[i] != middle) {
        return Ok(Verdict::fail("middle slopes", key, format!("slope {} = {}", i + 1, stats.slopes[i])));
    }
    let allowance = slack * (k as f64).ln() / (ctx.p() as f64).ln();
    let (i, drift) = stats.outer_drift();
    Ok(Verdict::check(drift <= allowance, "outer slope drift", key, || {
        format!("index {i}: deviation {drift:.3} exceeds {allowance:.3}")
    }))
}

/// In the boundary annulus the `n`-th slope at `η_{2,r}` is
/// `r (deg g_n - deg g_{n-1})`, with strictly increasing increments.
pub fn halo_check(ctx: &GhostContext, r: &BigRational, count: usize) -> Result<Verdict> {
    if *r <= BigRational::zero() || *r >= BigRational::one() {
        return Err(GhostError::InvalidRadius(format!("{r} is not in (0, 1)")));
    }
    if count == 0 {
        return Ok(Verdict::Pass);
    }
    let series = GhostSeries::shared(ctx);
    let w = WeightPoint::new(2, Rat::Finite(r.clone()))?;
    let np = series.ghost_np(&w, count)?;
    let slopes = np.slopes();
    let key = |n: u64| vec![ctx.p(), ctx.a(), ctx.s(), n as i64];
    let mut last: Option<i64> = None;
    for n in 1..=count as u64 {
        let inc = series.degree(n) as i64 - series.degree(n - 1) as i64;
        if last.is_some_and(|prev| inc <= prev) {
            return Ok(Verdict::fail("halo increments", key(n), format!("increment {inc} after {}", last.unwrap())));
        }
        last = Some(inc);
        let expected = r * BigInt::from(inc);
        if slopes[n as usize - 1] != expected {
            return Ok(Verdict::fail("halo slope", key(n), format!("{} vs {expected}", slopes[n as usize - 1])));
        }
    }
    if np.segments().iter().any(|(_, m)| *m != 1) {
        return Ok(Verdict::fail("halo multiplicity", key(0), "repeated slope".to_string()));
    }
    Ok(Verdict::Pass)
}

/// The polygon at `w_k`, exposed for reporting.
pub fn classical_polygon(ctx: &GhostContext, k: i64, count: usize) -> Result<NewtonPolygon> {
    GhostSeries::shared(ctx).ghost_np(&WeightPoint::classical(k), count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, a: i64, s: i64) -> GhostContext {
        GhostContext::new(p, a, 0, s).unwrap()
    }

    #[test]
    fn al_matrix_examples() {
        let c = ctx(7, 2, 0);
        let degs: Vec<u64> = (1..=4).map(|l| c.power_basis_degree(l).unwrap()).collect();
        assert_eq!(degs, vec![0, 2, 6, 8]);
        assert_eq!(al_matrix(&c, 10).unwrap(), vec![8, 6, 2, 0]);
        assert!(al_matrix(&ctx(7, 2, 3), 2).unwrap().is_empty());
        for p in [7u64, 11] {
            for a in 1..=(p as i64 - 4) {
                for s in 0..=(p as i64 - 2) {
                    let c = ctx(p, a, s);
                    for k in 2..=300 {
                        assert!(al_involution_check(&c, k).unwrap().is_pass(), "p={p} a={a} s={s} k={k}");
                    }
                }
            }
        }
    }

    // Brute-force corank data by scanning every index up to the largest one.
    fn corank_scan(c: &GhostContext, zeta: &[u64], xi: &[u64], k: i64) -> (u64, u64, i64) {
        let d = c.d_iw(k).unwrap() as u64;
        let top = zeta.iter().chain(xi).copied().max().unwrap_or(0).max(d);
        let mut r = 0;
        let mut s = 0;
        for i in 1..=top {
            if xi.contains(&i) && i <= d && d + 1 >= i && zeta.contains(&(d + 1 - i)) {
                r += 1;
            }
            if xi.contains(&i) && i > d {
                s += 1;
            }
        }
        (r, s, xi.len() as i64 - c.d_ur(k).unwrap() - r as i64 - s as i64)
    }

    #[test]
    fn corank_examples() {
        let c = ctx(7, 2, 0);
        for kb in 0..40 {
            let k = c.weight(kb);
            let (ur, iw) = (c.d_ur(k).unwrap(), c.d_iw(k).unwrap());
            for n in (ur + 1)..(iw - ur) {
                let set = IndexSet::initial(n as u64);
                let b = corank_bound(&c, &set, &set, k).unwrap();
                assert_eq!(b.corank, c.multiplicity(n as u64, k).unwrap() as i64);
            }
            let d = iw as u64;
            let far = IndexSet::new((d + 1..=d + 5).collect()).unwrap();
            let b = corank_bound(&c, &IndexSet::initial(5), &far, k).unwrap();
            assert_eq!((b.paired, b.nonclassical), (0, 5));
        }
        assert!(corank_bound(&c, &IndexSet::initial(2), &IndexSet::initial(3), 10).is_err());
        assert!(IndexSet::new(vec![0, 2]).is_err());
        assert!(IndexSet::new(vec![3, 3]).is_err());
    }

    #[test]
    fn theta_examples() {
        let c = ctx(7, 2, 0);
        assert!(theta_check(&c, 10, 3).unwrap().is_pass());
        assert!(theta_check(&c, 10, 0).unwrap().is_pass());
        for k0 in 2..60 {
            assert!(theta_check(&c, k0, 6).unwrap().is_pass(), "k0={k0}");
        }
    }

    #[test]
    fn atkin_lehner_examples() {
        let c = ctx(7, 2, 0);
        for k0 in [9, 11, 13, 30, 31] {
            assert!(al_check(&c, k0, 100).unwrap().is_pass(), "k0={k0}");
        }
        assert!(al_check(&c, 28, 5).is_err());
        assert!(pstab_check(&c, 28, 2).unwrap().is_pass());
        let slopes = classical_slopes(&c, 28, 10).unwrap();
        assert_eq!(&slopes[0] + &slopes[9], qi(27));
        assert_eq!(&slopes[1] + &slopes[8], qi(27));
        // Middle slopes pair to k0 - 2 and are excluded.
        assert_eq!(&slopes[2] + &slopes[7], qi(26));
    }

    #[test]
    fn gouvea_examples() {
        let c = ctx(7, 2, 0);
        let (refined, floor) = gouvea_bounds(&c, 28).unwrap().unwrap();
        assert_eq!((refined, floor), (qi(3), 3));
        assert!(gouvea_bound_check(&c, 28).unwrap().is_pass());
        assert!(gouvea_bound_check(&c, c.weight(0)).unwrap().is_pass());
    }

    #[test]
    fn gm_examples() {
        let c = ctx(11, 3, 2);
        let k1 = c.weight(7);
        assert!(gm_check(&c, k1, k1, 4).unwrap().is_pass());
        let k2 = k1 + 10 * 11i64.pow(4);
        assert!(gm_check(&c, k1, k2, 4).unwrap().is_pass());
        assert_eq!(gm_check(&c, k1, k2, 4).unwrap(), gm_check(&c, k2, k1, 4).unwrap());
        assert!(matches!(gm_check(&c, k1, k1 + 10 * 11, 4).unwrap(), Verdict::Inapplicable { .. }));
        assert!(matches!(gm_check(&c, k1, k2, 3).unwrap(), Verdict::Inapplicable { .. }));
    }

    #[test]
    fn distribution_examples() {
        let c = ctx(7, 2, 0);
        let st = distribution(&c, 28).unwrap();
        assert_eq!(st.slopes.len(), 10);
        assert!(st.slopes[2..8].iter().all(|s| *s == qi(13)));
        assert!(distribution_check(&c, 28, 10.0).unwrap().is_pass());
        let total: BigRational = st.histogram(12).into_iter().sum();
        assert_eq!(total, qi(1));
        let k0 = distribution(&c, c.weight(0)).unwrap();
        assert!(k0.kolmogorov_distance().is_some() || k0.slopes.is_empty());
    }

    #[test]
    fn limit_distribution_function() {
        let p = 11;
        assert_eq!(limit_cdf(p, &q(1, 12), false), q(1, 12));
        assert_eq!(limit_cdf(p, &q(1, 2), true), q(1, 12));
        assert_eq!(limit_cdf(p, &q(1, 2), false), q(11, 12));
        assert_eq!(limit_cdf(p, &qi(1), false), qi(1));
        assert_eq!(limit_cdf(p, &q(23, 24), false), q(11, 12) + q(1, 24));
    }

    // Riemann-sum cross-check of the exact W1 integral on a fine grid.
    #[test]
    fn wasserstein_matches_grid_estimate() {
        let c = ctx(11, 3, 0);
        let st = distribution(&c, c.weight(30)).unwrap();
        let exact = to_f64(&st.wasserstein_distance().unwrap());
        let steps = 20000;
        let mut approx = 0.0;
        for i in 0..steps {
            let x = q(2 * i + 1, 2 * steps);
            let emp = SlopeStats::empirical(&st.normalized(), &x).1;
            approx += to_f64(&(emp - limit_cdf(11, &x, false)).abs()) / steps as f64;
        }
        assert!((exact - approx).abs() < 1e-3, "{exact} vs {approx}");
        let ks = to_f64(&st.kolmogorov_distance().unwrap());
        assert!(ks >= exact);
    }

    #[test]
    fn halo_examples() {
        let c = ctx(7, 2, 0);
        assert!(halo_check(&c, &q(1, 2), 4).unwrap().is_pass());
        let np = GhostSeries::new(c.clone()).ghost_np(&WeightPoint::new(2, Rat::frac(1, 2)).unwrap(), 4).unwrap();
        assert_eq!(np.slopes(), vec![qi(0), q(3, 2), q(5, 2), qi(4)]);
        let third = GhostSeries::new(c.clone()).ghost_np(&WeightPoint::new(2, Rat::frac(1, 3)).unwrap(), 4).unwrap();
        let scaled: Vec<_> = np.slopes().into_iter().map(|s| s * q(2, 3)).collect();
        assert_eq!(third.slopes(), scaled);
        assert!(halo_check(&c, &qi(1), 4).is_err());
        for r in [q(1, 2), q(1, 3), q(2, 3)] {
            assert!(halo_check(&c, &r, 50).unwrap().is_pass());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn corank_matches_scan(zeta in proptest::collection::btree_set(1u64..40, 0..12), extra in proptest::collection::btree_set(1u64..40, 0..12), kb in 0i64..30) {
            let c = ctx(11, 3, 4);
            let n = zeta.len().min(extra.len());
            let z: Vec<u64> = zeta.into_iter().take(n).collect();
            let x: Vec<u64> = extra.into_iter().take(n).collect();
            let k = c.weight(kb);
            let b = corank_bound(&c, &IndexSet::new(z.clone()).unwrap(), &IndexSet::new(x.clone()).unwrap(), k).unwrap();
            prop_assert_eq!((b.paired, b.nonclassical, b.corank), corank_scan(&c, &z, &x, k));
        }
    }
}
