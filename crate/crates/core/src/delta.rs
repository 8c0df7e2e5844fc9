//! Punctured ghost valuations at classical weights, their convex hulls, the
//! near-Steinberg ranges they control, and the vertex theory built on them.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{GhostError, Result};
use crate::ghost::GhostContext;
use crate::newton::lower_hull;
use crate::padic::{floor_log, q, qi, vp_int, Rat};
use crate::series::GhostSeries;
use crate::verdict::Verdict;
use crate::weight::WeightPoint;

/// Normalized punctured valuations `Δ'` at one weight and their lower hull `Δ`,
/// indexed by `l` in `[-half_new, half_new]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaTable {
    k: i64,
    half_new: i64,
    delta_prime: Vec<BigRational>,
    delta: Vec<BigRational>,
    vertex_flags: Vec<bool>,
}

impl DeltaTable {
    /// Builds the table from the punctured valuations at `n = d_ur + i`,
    /// `i = 0..=d_new`.
    fn from_punctured(k: i64, punctured: &[i64]) -> Self {
        let half_new = (punctured.len() as i64 - 1) / 2;
        let slope = q(k - 2, 2);
        let delta_prime: Vec<BigRational> = punctured
            .iter()
            .enumerate()
            .map(|(i, &v)| qi(v) - &slope * BigInt::from(i as i64 - half_new))
            .collect();
        let points: Vec<(i64, BigRational)> =
            delta_prime.iter().cloned().enumerate().map(|(i, y)| (i as i64, y)).collect();
        let hull = lower_hull(&points);
        let mut delta = delta_prime.clone();
        let mut vertex_flags = vec![false; delta_prime.len()];
        for pair in hull.windows(2) {
            let (i0, i1) = (pair[0], pair[1]);
            let step = (&delta_prime[i1] - &delta_prime[i0]) / BigInt::from((i1 - i0) as i64);
            for (j, slot) in delta.iter_mut().enumerate().take(i1).skip(i0 + 1) {
                *slot = &delta_prime[i0] + &step * BigInt::from((j - i0) as i64);
            }
        }
        for &i in &hull {
            vertex_flags[i] = true;
        }
        DeltaTable { k, half_new, delta_prime, delta, vertex_flags }
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn half_new(&self) -> i64 {
        self.half_new
    }

    /// True when `d_new = 0`: only `l = 0` exists and there are no gaps.
    pub fn is_empty(&self) -> bool {
        self.half_new == 0
    }

    fn index(&self, l: i64) -> Result<usize> {
        if l.abs() > self.half_new {
            return Err(GhostError::IndexOutOfRange { index: l, lo: -self.half_new, hi: self.half_new });
        }
        Ok((l + self.half_new) as usize)
    }

    pub fn delta_prime(&self, l: i64) -> Result<&BigRational> {
        Ok(&self.delta_prime[self.index(l)?])
    }

    pub fn delta(&self, l: i64) -> Result<&BigRational> {
        Ok(&self.delta[self.index(l)?])
    }

    /// Whether `(l, Δ'_l)` is a vertex of the hull.
    pub fn is_hull_vertex(&self, l: i64) -> Result<bool> {
        Ok(self.vertex_flags[self.index(l)?])
    }

    /// `Δ_L - Δ_{L-1}` for `1 <= L <= half_new`.
    pub fn gap(&self, l: i64) -> Result<BigRational> {
        if l < 1 || l > self.half_new {
            return Err(GhostError::IndexOutOfRange { index: l, lo: 1, hi: self.half_new });
        }
        Ok(self.delta(l)? - self.delta(l - 1)?)
    }

    /// The hull slopes read left to right, one per unit step.
    pub fn unit_slopes(&self) -> Vec<BigRational> {
        self.delta.windows(2).map(|w| &w[1] - &w[0]).collect()
    }
}

/// `v_p` of the `n`-th ghost coefficient with the factors vanishing at `w_k`
/// removed, evaluated at `w_k`.
///
/// Equals `sum_{i >= 0} (S_i - m_n(k))` where `S_i` is the zero mass congruent
/// to `k` modulo `p^i`; the terms vanish once only `k` itself is left.
pub fn punctured_valuation(series: &GhostSeries, n: u64, k: i64) -> Result<i64> {
    let ctx = series.context();
    let kb = ctx.kbullet(k)?;
    if n == 0 {
        return Ok(0);
    }
    let own = ctx.mult_kb(n as i64, kb) as u64;
    let mut total = 0i64;
    for i in 0.. {
        let mass = series.congruent_mass(n, k, i);
        if mass == own {
            break;
        }
        total += (mass - own) as i64;
    }
    Ok(total)
}

/// `Δ'_{k,l}` computed directly.
pub fn delta_prime(ctx: &GhostContext, k: i64, l: i64) -> Result<BigRational> {
    let kb = ctx.kbullet(k)?;
    let half = (ctx.d_iw_kb(kb) - 2 * ctx.d_ur_kb(kb)) / 2;
    if l.abs() > half {
        return Err(GhostError::IndexOutOfRange { index: l, lo: -half, hi: half });
    }
    let n = ctx.d_iw_kb(kb) / 2 + l;
    let series = GhostSeries::shared(ctx);
    Ok(qi(punctured_valuation(&series, n as u64, k)?) - q(k - 2, 2) * BigInt::from(l))
}

pub fn delta_table(ctx: &GhostContext, k: i64) -> Result<DeltaTable> {
    build_table(&GhostSeries::shared(ctx), k)
}

fn build_table(series: &GhostSeries, k: i64) -> Result<DeltaTable> {
    let ctx = series.context();
    let kb = ctx.kbullet(k)?;
    let (ur, iw) = (ctx.d_ur_kb(kb), ctx.d_iw_kb(kb));
    let punctured = (ur..=iw - ur)
        .map(|n| punctured_valuation(series, n as u64, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaTable::from_punctured(k, &punctured))
}

/// Punctured valuations for every `k_bullet <= kb_max` at once.
///
/// Sweeps `n` instead of `k`: for each `n` the zero multiplicities over the
/// zero window are folded into residue-class sums modulo `p^j`, so each
/// punctured valuation costs a handful of lookups.
#[derive(Clone, Debug)]
pub struct PuncturedAtlas {
    ctx: GhostContext,
    rows: Vec<Vec<i64>>,
}

impl PuncturedAtlas {
    pub fn build(ctx: &GhostContext, kb_max: i64) -> Self {
        let kb_max = kb_max.max(0);
        let ranges: Vec<(i64, i64)> =
            (0..=kb_max).map(|kb| (ctx.d_ur_kb(kb), ctx.d_iw_kb(kb) - ctx.d_ur_kb(kb))).collect();
        let mut rows: Vec<Vec<i64>> = ranges.iter().map(|&(ur, top)| vec![0; (top - ur + 1) as usize]).collect();
        let n_top = ranges.iter().map(|r| r.1).max().unwrap_or(0);
        let p = ctx.p();
        for n in 1..=n_top {
            let targets: Vec<i64> =
                (0..=kb_max).filter(|&kb| ranges[kb as usize].0 <= n && n <= ranges[kb as usize].1).collect();
            if targets.is_empty() {
                continue;
            }
            let (lo, hi) = ctx.zero_window(n as u64);
            let mult: Vec<i64> = (lo..hi).map(|kb| ctx.mult_kb(n, kb)).collect();
            let degree: i64 = mult.iter().sum();
            let len = hi - lo;
            // classes[j-1][r] = mass of zeros with k_bullet = r mod p^j, for p^j <= len.
            let mut classes: Vec<Vec<i64>> = Vec::new();
            let mut modulus = p;
            while modulus <= len {
                classes.push(Vec::new());
                modulus *= p;
            }
            if let Some(top) = classes.len().checked_sub(1) {
                let m = p.pow(top as u32 + 1);
                let mut arr = vec![0i64; m as usize];
                for (i, &v) in mult.iter().enumerate() {
                    arr[(lo + i as i64).rem_euclid(m) as usize] += v;
                }
                classes[top] = arr;
                for j in (0..top).rev() {
                    let m = p.pow(j as u32 + 1);
                    let mut folded = vec![0i64; m as usize];
                    for (r, &v) in classes[j + 1].iter().enumerate() {
                        folded[r % m as usize] += v;
                    }
                    classes[j] = folded;
                }
            }
            for kb in targets {
                let own = if (lo..hi).contains(&kb) { mult[(kb - lo) as usize] } else { 0 };
                let mut total = degree - own;
                let mut j = 1u32;
                loop {
                    let m = p.pow(j);
                    let mass = if (j as usize) <= classes.len() {
                        classes[j as usize - 1][kb.rem_euclid(m) as usize]
                    } else {
                        // At most one window element per class at this level.
                        let first = lo + (kb - lo).rem_euclid(m);
                        if first < hi { mult[(first - lo) as usize] } else { 0 }
                    };
                    if mass == own {
                        break;
                    }
                    total += mass - own;
                    j += 1;
                }
                let (ur, _) = ranges[kb as usize];
                rows[kb as usize][(n - ur) as usize] = total;
            }
        }
        PuncturedAtlas { ctx: ctx.clone(), rows }
    }

    pub fn kb_max(&self) -> i64 {
        self.rows.len() as i64 - 1
    }

    /// Punctured valuations at `n = d_ur, ..., d_iw - d_ur` for this `k_bullet`.
    pub fn row(&self, kb: i64) -> Option<&[i64]> {
        self.rows.get(usize::try_from(kb).ok()?).map(|r| r.as_slice())
    }

    pub fn table(&self, kb: i64) -> Option<DeltaTable> {
        self.row(kb).map(|r| DeltaTable::from_punctured(self.ctx.weight(kb), r))
    }

    /// Checks `P(d_iw - d_ur - l) - P(d_ur + l) = (k - 2)(d_new/2 - l)` for
    /// every `l` in `0..=d_new/2`.
    pub fn duality_check(&self, kb: i64) -> Verdict {
        let Some(row) = self.row(kb) else {
            return Verdict::inapplicable(format!("k_bullet {kb} outside atlas"));
        };
        let k = self.ctx.weight(kb);
        let half = (row.len() as i64 - 1) / 2;
        for l in 0..=half {
            let lhs = row[(2 * half - l) as usize] - row[l as usize];
            let rhs = (k - 2) * (half - l);
            if lhs != rhs {
                return Verdict::fail(
                    "ghost duality",
                    vec![self.ctx.p(), self.ctx.a(), self.ctx.s(), kb, l],
                    format!("difference {lhs}, expected {rhs}"),
                );
            }
        }
        Verdict::Pass
    }
}

/// The interval `(d_iw/2 - L, d_iw/2 + L)` with `L` the largest index whose
/// hull gap is at most the distance from the point to `w_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearSteinbergRange {
    pub k: i64,
    pub center: i64,
    /// `None` when no `L >= 1` qualifies.
    pub extent: Option<i64>,
}

impl NearSteinbergRange {
    pub fn is_empty(&self) -> bool {
        self.extent.is_none()
    }

    pub fn contains_open(&self, n: i64) -> bool {
        self.extent.is_some_and(|l| (n - self.center).abs() < l)
    }

    pub fn contains_closed(&self, n: i64) -> bool {
        self.extent.is_some_and(|l| (n - self.center).abs() <= l)
    }

    /// Open interval endpoints, if nonempty.
    pub fn bounds(&self) -> Option<(i64, i64)> {
        self.extent.map(|l| (self.center - l, self.center + l))
    }
}

/// Delta tables of one context, cached by `k_bullet` and shared across threads.
#[derive(Debug)]
pub struct DeltaAnalyzer {
    series: GhostSeries,
    tables: RwLock<HashMap<i64, Arc<DeltaTable>>>,
}

impl DeltaAnalyzer {
    pub fn new(ctx: GhostContext) -> Self {
        DeltaAnalyzer { series: GhostSeries::new(ctx), tables: RwLock::new(HashMap::new()) }
    }

    /// Precomputes every table with `k_bullet <= kb_max` through the atlas.
    pub fn prefill(&self, kb_max: i64) {
        let atlas = PuncturedAtlas::build(self.context(), kb_max);
        let mut tables = self.tables.write().unwrap();
        for kb in 0..=kb_max {
            tables.entry(kb).or_insert_with(|| Arc::new(atlas.table(kb).expect("row in range")));
        }
    }

    pub fn context(&self) -> &GhostContext {
        self.series.context()
    }

    pub fn series(&self) -> &GhostSeries {
        &self.series
    }

    pub fn table(&self, k: i64) -> Result<Arc<DeltaTable>> {
        let kb = self.context().kbullet(k)?;
        if let Some(t) = self.tables.read().unwrap().get(&kb) {
            return Ok(t.clone());
        }
        let table = Arc::new(build_table(&self.series, k)?);
        self.tables.write().unwrap().insert(kb, table.clone());
        Ok(table)
    }

    /// Largest `L` in `1..=d_new/2` with `v_p(w - w_k) >= Δ_L - Δ_{L-1}`.
    ///
    /// The hull is convex, so its gaps increase with `L` and the qualifying
    /// indices form an initial segment.
    pub fn near_steinberg(&self, w: &WeightPoint, k: i64) -> Result<NearSteinbergRange> {
        let table = self.table(k)?;
        let dist = w.vp_diff(self.context().p() as u64, k);
        let center = self.context().d_iw_kb(self.context().kbullet(k)?) / 2;
        let reaches = |l: i64| -> bool {
            match &dist {
                Rat::Infinity => true,
                Rat::Finite(d) => *d >= table.gap(l).expect("l in range"),
            }
        };
        let (mut lo, mut hi) = (0i64, table.half_new());
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if reaches(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(NearSteinbergRange { k, center, extent: (lo >= 1).then_some(lo) })
    }

    /// Whether `n` lies in an open near-Steinberg range at `w`. Only zeros of
    /// `g_n` can have a range containing `n`.
    pub fn is_near_steinberg(&self, w: &WeightPoint, n: u64) -> Result<bool> {
        let ctx = self.context();
        let (lo, hi) = ctx.zero_window(n);
        for kb in lo..hi {
            if ctx.mult_kb(n as i64, kb) == 0 {
                continue;
            }
            if self.near_steinberg(w, ctx.weight(kb))?.contains_open(n as i64) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Membership of `w` in the vertex region of `n`, read off from the disks
    /// `v_p(w - w_k) >= Δ_{j+1} - Δ_j`, `j = |d_iw/2 - n|`, around zeros of `g_n`.
    pub fn vtx_contains(&self, n: u64, w: &WeightPoint) -> Result<bool> {
        let ctx = self.context();
        let (lo, hi) = ctx.zero_window(n);
        for kb in lo..hi {
            if ctx.mult_kb(n as i64, kb) == 0 {
                continue;
            }
            let k = ctx.weight(kb);
            let table = self.table(k)?;
            let j = (ctx.d_iw_kb(kb) / 2 - n as i64).abs();
            let inside = match w.vp_diff(ctx.p() as u64, k) {
                Rat::Infinity => true,
                Rat::Finite(d) => d >= table.gap(j + 1)?,
            };
            if inside {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `(n, v_p(g_n(w)))` is a vertex of the ghost Newton polygon.
    pub fn is_vertex(&self, w: &WeightPoint, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(GhostError::IndexOutOfRange { index: 0, lo: 1, hi: i64::MAX });
        }
        Ok(self.series.ghost_np_certified(w, n as usize + 1)?.is_vertex(n))
    }

    /// Lower bound on `Δ_{l2} - Δ'_{l}` and, with a nearby weight `k'`, its
    /// refinement by `v_p(w_k - w_k')`.
    pub fn delta_gap_check(&self, k: i64, l: i64, l1: i64, l2: i64, k_prime: Option<i64>) -> Result<Verdict> {
        let ctx = self.context();
        if ctx.p() < 7 {
            return Ok(Verdict::inapplicable("requires p >= 7"));
        }
        let table = self.table(k)?;
        let h = table.half_new();
        if !(0 <= l && l <= l1 && l1 <= l2 && l2 <= h && l < l2) {
            return Ok(Verdict::inapplicable(format!("indices ({l}, {l1}, {l2}) outside 0..={h} or unordered")));
        }
        if (l, l1, l2) == (0, 1, 1) {
            return Ok(Verdict::inapplicable("excluded triple (0, 1, 1)"));
        }
        let key = vec![ctx.p(), ctx.a(), ctx.s(), ctx.kbullet(k)?, l, l1, l2];
        let diff = table.delta(l2)? - table.delta_prime(l)?;
        let base = q(l2 * l2 - l * l, 2);
        if diff < &base + qi(1) {
            return Ok(Verdict::fail("gap lower bound", key, format!("difference {diff} below {}", &base + qi(1))));
        }
        let Some(kp) = k_prime else {
            return Ok(Verdict::Pass);
        };
        let kbp = ctx.kbullet(kp)?;
        if kp == k {
            return Ok(Verdict::inapplicable("k' equals k"));
        }
        let mid = ctx.d_iw_kb(ctx.kbullet(k)?) / 2;
        let (ur, iw) = (ctx.d_ur_kb(kbp), ctx.d_iw_kb(kbp));
        let near = |x: i64| (x - mid).abs() <= l1;
        if !near(ur) && !near(iw - ur) {
            return Ok(Verdict::inapplicable("k' dimensions not within l' of the midpoint"));
        }
        let dist = 1 + vp_int((k - kp) as i128, ctx.p() as u64)? as i64;
        let gamma = floor_log(((ctx.p() + 1) * l2) as u128, ctx.p() as u64) as i64 + 1;
        let lhs = diff - qi((l2 - l1) * dist);
        let rhs = qi((l1 - l) * gamma) + base;
        let mut key = key;
        key.push(kbp);
        Ok(Verdict::check(lhs >= rhs, "refined gap lower bound", key, || {
            format!("{lhs} below {rhs} at distance {dist}")
        }))
    }

    /// Bound `v_p(w_k - w_k') <= γ` under the three distance hypotheses.
    pub fn wk_distance_criterion(&self, k: i64, k_prime: i64) -> Result<Verdict> {
        let ctx = self.context();
        let (kb, kbp) = (ctx.kbullet(k)?, ctx.kbullet(k_prime)?);
        if kb == kbp {
            return Ok(Verdict::inapplicable("weights coincide"));
        }
        let (ur, iw) = (ctx.d_ur_kb(kb), ctx.d_iw_kb(kb));
        let half_new = (iw - 2 * ur) / 2;
        if half_new == 0 {
            return Ok(Verdict::inapplicable("no new forms at k"));
        }
        let mid_p = ctx.d_iw_kb(kbp) / 2;
        let ur_p = ctx.d_ur_kb(kbp);
        let hyp = if (ur..=iw - ur).contains(&mid_p) {
            1
        } else if kbp < kb {
            2
        } else if (ur..iw / 2).contains(&ur_p) {
            3
        } else {
            return Ok(Verdict::inapplicable("none of the distance hypotheses holds"));
        };
        let p = ctx.p() as u64;
        let gamma = floor_log(((ctx.p() + 1) * half_new) as u128, p) as i64 + 1;
        let dist = 1 + vp_int((kb - kbp) as i128, p)? as i64;
        Ok(Verdict::check(
            dist <= gamma,
            "weight distance bound",
            vec![ctx.p(), ctx.a(), ctx.s(), kb, kbp, hyp],
            || format!("distance {dist} exceeds {gamma} under hypothesis {hyp}"),
        ))
    }

    /// Slopes of multiplicity one are integers; all others have even
    /// multiplicity and lie in `a/2 + Z`. Checked on the ghost polygon at
    /// `w_{k0}` up to its first vertex past `count` and, when `k0` is on the
    /// disk, on the hull of its delta table shifted back by `(k0 - 2)/2`.
    pub fn slope_integrality(&self, k0: i64, count: usize) -> Result<Verdict> {
        let ctx = self.context();
        let half_a = q(ctx.a(), 2);
        let ok = |s: &BigRational, m: u64| {
            if m == 1 {
                s.is_integer()
            } else {
                m.is_multiple_of(2) && (s - &half_a).is_integer()
            }
        };
        let np = self.series.ghost_np_certified(&WeightPoint::classical(k0), count)?;
        for (s, m) in np.segments() {
            if !ok(&s, m) {
                return Ok(Verdict::fail(
                    "slope integrality",
                    vec![ctx.p(), ctx.a(), ctx.s(), k0, 0],
                    format!("ghost slope {s} with multiplicity {m}"),
                ));
            }
        }
        if ctx.kbullet(k0).is_ok() {
            // The hull is normalized by subtracting (k0 - 2) l / 2; the
            // statement concerns the unnormalized punctured valuations.
            let shift = q(k0 - 2, 2);
            let slopes: Vec<BigRational> = self.table(k0)?.unit_slopes().into_iter().map(|s| s + &shift).collect();
            let mut i = 0;
            while i < slopes.len() {
                let mut j = i;
                while j < slopes.len() && slopes[j] == slopes[i] {
                    j += 1;
                }
                if !ok(&slopes[i], (j - i) as u64) {
                    return Ok(Verdict::fail(
                        "slope integrality",
                        vec![ctx.p(), ctx.a(), ctx.s(), k0, 1],
                        format!("hull slope {} with multiplicity {}", slopes[i], j - i),
                    ));
                }
                i = j;
            }
        }
        Ok(Verdict::Pass)
    }

    /// For `k' != k` at least as close to `w_k` as the gap at `L`, the
    /// dimensions of `k'` avoid the near-Steinberg range of `(w, k)`.
    pub fn exclusion_check(&self, w: &WeightPoint, k: i64) -> Result<Verdict> {
        let ctx = self.context();
        let range = self.near_steinberg(w, k)?;
        let Some(l) = range.extent else {
            return Ok(Verdict::inapplicable("empty near-Steinberg range"));
        };
        let table = self.table(k)?;
        let gap = table.gap(l)?;
        let kb = ctx.kbullet(k)?;
        let p = ctx.p();
        // Beyond this bound d_ur(k') already exceeds every index in the range.
        let reach = ((p + 1) * (range.center + l + 1) + 2 * p) / 2 + 1;
        let min_level = {
            // Smallest j with 1 + j >= gap, i.e. p^j must divide k_bullet - k_bullet'.
            let mut j = 0i64;
            while qi(1 + j) < gap {
                j += 1;
            }
            j
        };
        let step = p.checked_pow(min_level as u32).unwrap_or(i64::MAX);
        let mut kbp = kb.rem_euclid(step);
        while kbp <= reach {
            if kbp != kb {
                let (ur, iw) = (ctx.d_ur_kb(kbp), ctx.d_iw_kb(kbp));
                let bad = range.contains_closed(iw / 2) || range.contains_open(ur) || range.contains_open(iw - ur);
                if bad {
                    return Ok(Verdict::fail(
                        "near-Steinberg exclusion",
                        vec![p, ctx.a(), ctx.s(), kb, kbp],
                        format!("range {:?} meets dimensions ({ur}, {}, {})", range.bounds(), iw / 2, iw - ur),
                    ));
                }
            }
            kbp = kbp.saturating_add(step);
        }
        Ok(Verdict::Pass)
    }

    /// Open near-Steinberg ranges at `w` over `k_bullet <= kb_max` are
    /// pairwise nested or disjoint.
    pub fn laminar_check(&self, w: &WeightPoint, kb_max: i64) -> Result<Verdict> {
        let ctx = self.context();
        let mut ranges = Vec::new();
        for kb in 0..=kb_max {
            if let Some(b) = self.near_steinberg(w, ctx.weight(kb))?.bounds() {
                ranges.push((kb, b));
            }
        }
        for (i, &(kb1, (a1, b1))) in ranges.iter().enumerate() {
            for &(kb2, (a2, b2)) in &ranges[i + 1..] {
                // Open integer intervals: their interiors are a+1..=b-1.
                let (x1, y1, x2, y2) = (a1 + 1, b1 - 1, a2 + 1, b2 - 1);
                let disjoint = y1 < x2 || y2 < x1;
                let nested = (x1 <= x2 && y2 <= y1) || (x2 <= x1 && y1 <= y2);
                if !disjoint && !nested {
                    return Ok(Verdict::fail(
                        "near-Steinberg nesting",
                        vec![ctx.p(), ctx.a(), ctx.s(), kb1, kb2],
                        format!("({a1}, {b1}) and ({a2}, {b2}) cross"),
                    ));
                }
            }
        }
        Ok(Verdict::Pass)
    }

    /// For `0 <= l < d_new/2`: `(l, Δ'_l)` is off the hull exactly when
    /// `d_iw/2 + l` is near-Steinberg at `w_{k0}` for a larger weight, exactly
    /// when `d_iw/2 - l` is for a smaller one.
    pub fn hull_vertex_equivalence(&self, k0: i64) -> Result<Verdict> {
        let ctx = self.context();
        let table = self.table(k0)?;
        let kb0 = ctx.kbullet(k0)?;
        let mid = ctx.d_iw_kb(kb0) / 2;
        let w = WeightPoint::classical(k0);
        for l in 0..table.half_new() {
            let off_hull = !table.is_hull_vertex(l)?;
            let side = |n: i64, above: bool| -> Result<bool> {
                let (lo, hi) = ctx.zero_window(n as u64);
                for kb in lo..hi {
                    if (above && kb <= kb0) || (!above && kb >= kb0) || ctx.mult_kb(n, kb) == 0 {
                        continue;
                    }
                    if self.near_steinberg(&w, ctx.weight(kb))?.contains_open(n) {
                        return Ok(true);
                    }
                }
                Ok(false)
            };
            let upper = side(mid + l, true)?;
            let lower = side(mid - l, false)?;
            if off_hull != upper || off_hull != lower {
                return Ok(Verdict::fail(
                    "hull vertex equivalence",
                    vec![ctx.p(), ctx.a(), ctx.s(), kb0, l],
                    format!("off hull {off_hull}, larger weight {upper}, smaller weight {lower}"),
                ));
            }
        }
        Ok(Verdict::Pass)
    }
}

fn zero_distance(p: u64, k0: i64, k: i64) -> Rat {
    if k == k0 {
        Rat::Infinity
    } else {
        Rat::int(1 + vp_int((k - k0) as i128, p).expect("nonzero") as i64)
    }
}

fn check_mu(mu: &BigRational) -> Result<()> {
    if *mu <= BigRational::zero() {
        return Err(GhostError::InvalidRadius(format!("{mu} is not positive")));
    }
    Ok(())
}

/// Rate of change of `v_p(g_n)` as the radius grows past `p^(-mu)` around
/// `w_{k0}`: minus the zero mass in the closed disk.
pub fn slope_derivative_plus(ctx: &GhostContext, n: u64, k0: i64, mu: &BigRational) -> Result<i64> {
    check_mu(mu)?;
    if n == 0 {
        return Ok(0);
    }
    let p = ctx.p() as u64;
    let mu = Rat::Finite(mu.clone());
    let g = ctx.ghost_coefficient(n)?;
    Ok(-g.zeros.iter().filter(|(&k, _)| zero_distance(p, k0, k) >= mu).map(|(_, &m)| m as i64).sum::<i64>())
}

/// Rate of change of `v_p(g_n)` as the radius shrinks from `p^(-mu)` into the
/// residue class `alpha` of subdisks. Class `alpha` of an integer radius is
/// centered at `w_{k0 + alpha p^(mu-1)}`; at a fractional radius only the
/// class of the center carries zeros.
pub fn slope_derivative_dir(ctx: &GhostContext, n: u64, k0: i64, mu: &BigRational, alpha: u64) -> Result<i64> {
    check_mu(mu)?;
    let p = ctx.p() as u64;
    if alpha >= p {
        return Err(GhostError::InvalidArgument(format!("class {alpha} is not below {p}")));
    }
    if n == 0 {
        return Ok(0);
    }
    let level = Rat::Finite(mu.clone());
    let g = ctx.ghost_coefficient(n)?;
    let mut total = 0i64;
    for (&k, &m) in &g.zeros {
        let d = zero_distance(p, k0, k);
        let class = if d > level {
            0
        } else if d == level {
            let e = mu.to_integer();
            let shift = (k - k0) / (p as i64).pow(e.try_into().unwrap_or(0u32).saturating_sub(1));
            shift.rem_euclid(p as i64) as u64
        } else {
            continue;
        };
        if class == alpha {
            total += m as i64;
        }
    }
    Ok(total)
}

/// The outward derivative plus all inward ones vanishes. Both sides are
/// computed by zero counting and again by exact finite differences of the
/// valuation, which is piecewise linear with breaks only at integer radii.
pub fn harmonicity_check(series: &GhostSeries, n: u64, k0: i64, mu: &BigRational) -> Result<Verdict> {
    check_mu(mu)?;
    let ctx = series.context();
    let p = ctx.p() as u64;
    let key = vec![ctx.p(), ctx.a(), ctx.s(), n as i64, k0];
    let plus = slope_derivative_plus(ctx, n, k0, mu)?;
    let classes: Vec<i64> =
        (0..p).map(|alpha| slope_derivative_dir(ctx, n, k0, mu, alpha)).collect::<Result<_>>()?;
    let sum: i64 = plus + classes.iter().sum::<i64>();
    if sum != 0 {
        return Ok(Verdict::fail("harmonicity", key, format!("outward {plus}, inward {classes:?}")));
    }
    let at = |center: i64, r: BigRational| -> Result<BigRational> {
        Ok(series.vp_ghost(n, &WeightPoint::new(center, Rat::Finite(r))?).expect_finite().clone())
    };
    let floor = mu.floor();
    let below = if floor == *mu { floor.clone() - BigRational::one() } else { floor.clone() };
    let eps_out = (mu - &below) / qi(2);
    let eps_in = (floor + BigRational::one() - mu) / qi(2);
    let base = at(k0, mu.clone())?;
    let fd_plus = (at(k0, mu - &eps_out)? - &base) / &eps_out;
    if fd_plus != qi(plus) {
        return Ok(Verdict::fail("outward derivative", key, format!("counted {plus}, measured {fd_plus}")));
    }
    let integral = mu.is_integer();
    for (alpha, &count) in classes.iter().enumerate() {
        let center = if alpha == 0 {
            k0
        } else if integral {
            let e = mu.to_integer().try_into().unwrap_or(1u32);
            k0 + alpha as i64 * (p as i64).pow(e - 1)
        } else {
            if count != 0 {
                return Ok(Verdict::fail("inward derivative", key, format!("class {alpha} holds zeros")));
            }
            continue;
        };
        let fd = (at(center, mu + &eps_in)? - &base) / &eps_in;
        if fd != qi(count) {
            return Ok(Verdict::fail(
                "inward derivative",
                key,
                format!("class {alpha}: counted {count}, measured {fd}"),
            ));
        }
    }
    Ok(Verdict::Pass)
}
