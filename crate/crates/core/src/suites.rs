//! Named verification sweeps shared by the CLI and the acceptance tests.
//!
//! Every sweep fans out over a rayon pool and folds its verdicts into a
//! [`Tally`], so the reported counterexample is the one with the smallest key
//! regardless of scheduling. Random instances come from a ChaCha stream
//! seeded per local datum, which keeps results independent of worker count.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta::{harmonicity_check, DeltaAnalyzer, PuncturedAtlas};
use crate::error::{GhostError, Result};
use crate::ghost::GhostContext;
use crate::mahler::{integrality_check, mahler_suite};
use crate::padic::{q, Rat};
use crate::series::GhostSeries;
use crate::theorems::{
    al_involution_check, compatibility_checks, corank_bound, distribution, distribution_check, gm_check,
    gouvea_bound_check, halo_check, IndexSet,
};
use crate::verdict::{Tally, Verdict};
use crate::weight::WeightPoint;

/// Environment variable holding the worker count for sweeps.
pub const WORKERS_ENV: &str = "GHOST_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Duality,
    Vertex,
    Gouvea,
    Gm,
    Dist,
    Halo,
    Mahler,
    Delta,
    Harmonic,
    AlThetaPstab,
    Corank,
    Companion,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Duality,
        Suite::Vertex,
        Suite::Gouvea,
        Suite::Gm,
        Suite::Dist,
        Suite::Halo,
        Suite::Mahler,
        Suite::Delta,
        Suite::Harmonic,
        Suite::AlThetaPstab,
        Suite::Corank,
        Suite::Companion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Vertex => "vertex",
            Suite::Gouvea => "gouvea",
            Suite::Gm => "gm",
            Suite::Dist => "dist",
            Suite::Halo => "halo",
            Suite::Mahler => "mahler",
            Suite::Delta => "delta",
            Suite::Harmonic => "harmonic",
            Suite::AlThetaPstab => "al-theta-pstab",
            Suite::Corank => "corank",
            Suite::Companion => "companion",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = GhostError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| GhostError::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

/// Bounds and seeds for a sweep. Fields a suite does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub primes: Vec<u64>,
    /// Restrict to one Serre weight exponent; all generic ones otherwise.
    pub a: Option<i64>,
    /// Restrict to one character twist; all of them otherwise.
    pub s: Option<i64>,
    pub kb_max: i64,
    pub n_max: u64,
    /// Random instances per local datum (per `m` for the GM sweep).
    pub samples: usize,
    pub seed: u64,
    pub m_values: Vec<i64>,
    pub slack: f64,
    /// Weight indices `k•` at which slope distributions are sampled.
    pub dist_points: Vec<i64>,
    pub radii: Vec<Rat>,
}

impl SweepConfig {
    /// The bounds used by the acceptance suite for `suite`.
    pub fn defaults(suite: Suite) -> Self {
        let base = SweepConfig {
            primes: vec![7, 11],
            a: None,
            s: None,
            kb_max: 100,
            n_max: 30,
            samples: 200,
            seed: 1,
            m_values: vec![4, 5, 6, 7],
            slack: default_slack(),
            dist_points: vec![50, 100, 200, 400],
            radii: vec![Rat::frac(1, 2), Rat::frac(1, 3), Rat::frac(2, 3)],
        };
        match suite {
            Suite::Duality => SweepConfig { primes: vec![7, 11, 13], kb_max: 500, ..base },
            Suite::Vertex => SweepConfig { kb_max: 60, n_max: 40, samples: 500, ..base },
            Suite::Gouvea => SweepConfig { primes: vec![11], kb_max: 300, ..base },
            Suite::Gm => SweepConfig { primes: vec![11], samples: 50, ..base },
            Suite::Dist => SweepConfig { primes: vec![11], ..base },
            Suite::Halo => SweepConfig { n_max: 50, ..base },
            Suite::Mahler => SweepConfig { primes: vec![7], n_max: 200, ..base },
            Suite::Delta => SweepConfig { kb_max: 120, samples: 50, ..base },
            Suite::Harmonic => SweepConfig { n_max: 40, ..base },
            Suite::AlThetaPstab => SweepConfig { a: Some(2), ..base },
            Suite::Corank => base,
            Suite::Companion => base,
        }
    }
}

/// A named numeric series produced alongside a sweep, e.g. distances of a
/// slope distribution to its limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Metric {
    pub series: String,
    pub key: Vec<i64>,
    pub value: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub tally: Tally,
    pub metrics: Vec<Metric>,
}

#[derive(serde::Deserialize)]
struct SlackFixture {
    slack: f64,
}

/// Default slack for the outer slope drift, derived offline by the
/// `derive_slack` example and stored as a fixture.
pub fn default_slack() -> f64 {
    let raw = include_str!("../fixtures/distribution_slack.json");
    serde_json::from_str::<SlackFixture>(raw)
        .expect("slack fixture is valid JSON")
        .slack
}

/// Worker count from [`WORKERS_ENV`], or rayon's default when unset.
pub fn worker_count() -> Result<Option<usize>> {
    std::env::var(WORKERS_ENV).ok().map(|v| parse_workers(&v)).transpose()
}

fn parse_workers(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(GhostError::InvalidArgument(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
    }
}

/// Runs `suite` on a pool sized by [`worker_count`].
pub fn run(suite: Suite, cfg: &SweepConfig) -> Result<SuiteReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| GhostError::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| run_in_current_pool(suite, cfg))
}

pub fn run_in_current_pool(suite: Suite, cfg: &SweepConfig) -> Result<SuiteReport> {
    let ctxs = contexts(cfg)?;
    let (tally, metrics) = match suite {
        Suite::Duality => (per_context(&ctxs, |c| duality(c, cfg))?, Vec::new()),
        Suite::Vertex => (per_context(&ctxs, |c| vertex(c, cfg))?, Vec::new()),
        Suite::Gouvea => (per_context(&ctxs, |c| gouvea(c, cfg))?, Vec::new()),
        Suite::Gm => (gm(cfg)?, Vec::new()),
        Suite::Dist => dist(&ctxs, cfg)?,
        Suite::Halo => (per_context(&ctxs, |c| halo(c, cfg))?, Vec::new()),
        Suite::Mahler => (mahler(cfg)?, Vec::new()),
        Suite::Delta => (per_context(&ctxs, |c| delta(c, cfg))?, Vec::new()),
        Suite::Harmonic => (per_context(&ctxs, |c| harmonic(c, cfg))?, Vec::new()),
        Suite::AlThetaPstab => (per_context(&ctxs, |c| al_theta_pstab(c, cfg))?, Vec::new()),
        Suite::Corank => (per_context(&ctxs, |c| corank(c, cfg))?, Vec::new()),
        Suite::Companion => (per_context(&ctxs, |c| companion(c, cfg))?, Vec::new()),
    };
    Ok(SuiteReport { suite, tally, metrics })
}

/// Every local datum selected by the config, with `b = 0`.
pub fn contexts(cfg: &SweepConfig) -> Result<Vec<GhostContext>> {
    let mut out = Vec::new();
    for &p in &cfg.primes {
        let pi = p as i64;
        let a_range: Vec<i64> = match cfg.a {
            Some(a) => vec![a],
            None => (1..=pi - 4).collect(),
        };
        let s_range: Vec<i64> = match cfg.s {
            Some(s) => vec![s],
            None => (0..=pi - 2).collect(),
        };
        for &a in &a_range {
            for &s in &s_range {
                out.push(GhostContext::new(p, a, 0, s)?);
            }
        }
    }
    Ok(out)
}

fn rng_for(ctx: &GhostContext, seed: u64, salt: u64) -> ChaCha8Rng {
    let mix = ((ctx.p() as u64) << 40) ^ ((ctx.a() as u64) << 24) ^ ((ctx.s() as u64) << 8) ^ salt;
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ mix)
}

fn per_context<F>(ctxs: &[GhostContext], f: F) -> Result<Tally>
where
    F: Fn(&GhostContext) -> Result<Tally> + Sync,
{
    ctxs.par_iter()
        .map(&f)
        .try_reduce(Tally::default, |x, y| Ok(x.merge(y)))
}

fn collect<I: IntoParallelIterator<Item = Result<Verdict>>>(items: I) -> Result<Tally> {
    let verdicts: Vec<Verdict> = items.into_par_iter().collect::<Result<_>>()?;
    Ok(verdicts.into_iter().collect())
}

fn duality(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    let atlas = PuncturedAtlas::build(ctx, cfg.kb_max);
    Ok((0..=cfg.kb_max).map(|kb| atlas.duality_check(kb)).collect())
}

fn random_point(rng: &mut ChaCha8Rng, ctx: &GhostContext, kb_max: i64) -> Result<WeightPoint> {
    let center = rng.gen_range(2..=ctx.weight(kb_max));
    let radius = if rng.gen_range(0..8) == 0 {
        Rat::Infinity
    } else {
        let den = rng.gen_range(1..=4);
        Rat::frac(rng.gen_range(1..=5 * den), den)
    };
    WeightPoint::new(center, radius)
}

fn vertex(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    let mut rng = rng_for(ctx, cfg.seed, 3);
    let cases: Vec<(WeightPoint, u64)> = (0..cfg.samples)
        .map(|_| Ok((random_point(&mut rng, ctx, cfg.kb_max)?, rng.gen_range(1..=cfg.n_max))))
        .collect::<Result<_>>()?;
    let an = DeltaAnalyzer::new(ctx.clone());
    collect(cases.par_iter().enumerate().map(|(i, (w, n))| {
        let vertex = an.is_vertex(w, *n)?;
        let near = an.is_near_steinberg(w, *n)?;
        let region = an.vtx_contains(*n, w)?;
        Ok(Verdict::check(
            vertex != near && vertex == region,
            "vertex equivalence",
            vec![ctx.p(), ctx.a(), ctx.s(), i as i64],
            || format!("n={n} at center {} radius {}: vertex {vertex}, near-Steinberg {near}, region {region}", w.center(), w.radius()),
        ))
    }))
}

fn gouvea(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    collect((0..=cfg.kb_max).into_par_iter().map(|kb| gouvea_bound_check(ctx, ctx.weight(kb))))
}

/// Seeded admissible pairs `k2 = k1 + (p-1) p^m j`, each checked in both
/// orders.
fn gm(cfg: &SweepConfig) -> Result<Tally> {
    let mut jobs = Vec::new();
    for &p in &cfg.primes {
        for &m in &cfg.m_values {
            let pool = contexts(&SweepConfig { primes: vec![p], ..cfg.clone() })?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (p << 32) ^ m as u64);
            for _ in 0..cfg.samples {
                let ctx = pool[rng.gen_range(0..pool.len())].clone();
                let first = (0..).map(|kb| ctx.weight(kb)).find(|&k| k >= m - 2).expect("weights grow");
                let k1 = rng.gen_range(ctx.kbullet(first)?..=cfg.kb_max.max(ctx.kbullet(first)?));
                let k1 = ctx.weight(k1);
                let step = (ctx.p() - 1) * ctx.p().pow(m as u32);
                let k2 = k1 + step * rng.gen_range(1..=3);
                jobs.push((ctx, k1, k2, m));
            }
        }
    }
    collect(jobs.into_par_iter().flat_map_iter(|(ctx, k1, k2, m)| {
        [gm_check(&ctx, k1, k2, m), gm_check(&ctx, k2, k1, m)]
    }))
}

/// Middle block and outer drift at every sampled weight, plus the trend of
/// the Kolmogorov distance along the sampled weights.
fn dist(ctxs: &[GhostContext], cfg: &SweepConfig) -> Result<(Tally, Vec<Metric>)> {
    let per: Vec<(Tally, Vec<Metric>)> = ctxs
        .par_iter()
        .map(|ctx| {
            let mut tally = Tally::default();
            let mut metrics = Vec::new();
            let mut distances = Vec::new();
            for &kb in &cfg.dist_points {
                let k = ctx.weight(kb);
                tally.add(distribution_check(ctx, k, cfg.slack)?);
                let stats = distribution(ctx, k)?;
                let key = vec![ctx.p(), ctx.a(), ctx.s(), kb];
                let ks = stats.kolmogorov_distance().map(Rat::Finite).unwrap_or(Rat::Infinity);
                let w1 = stats.wasserstein_distance().map(Rat::Finite).unwrap_or(Rat::Infinity);
                metrics.push(Metric { series: "kolmogorov".into(), key: key.clone(), value: ks.clone() });
                metrics.push(Metric { series: "wasserstein".into(), key, value: w1 });
                distances.push((kb, ks));
            }
            let bad = distances.windows(2).find(|w| w[1].1 >= w[0].1);
            tally.add(Verdict::check(
                bad.is_none(),
                "kolmogorov trend",
                vec![ctx.p(), ctx.a(), ctx.s()],
                || {
                    let w = bad.expect("failure has a window");
                    format!("distance {} at k•={} does not drop below {} at k•={}", w[1].1, w[1].0, w[0].1, w[0].0)
                },
            ));
            Ok((tally, metrics))
        })
        .collect::<Result<_>>()?;
    let mut tally = Tally::default();
    let mut metrics = Vec::new();
    for (t, m) in per {
        tally = tally.merge(t);
        metrics.extend(m);
    }
    Ok((tally, metrics))
}

fn halo(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    collect(cfg.radii.par_iter().map(|r| {
        let r = r
            .as_finite()
            .ok_or_else(|| GhostError::InvalidRadius("infinite radius in the halo sweep".into()))?;
        halo_check(ctx, r, cfg.n_max as usize)
    }))
}

fn mahler(cfg: &SweepConfig) -> Result<Tally> {
    let mut tally = Tally::default();
    for &p in &cfg.primes {
        let y_max = 3 * p * p;
        let shape_max = cfg.n_max.max(300);
        let inverse_max = cfg.n_max.min(100);
        tally = tally.merge(mahler_suite(p, y_max, cfg.n_max, shape_max, inverse_max)?);
        tally = tally.merge(collect((0..=inverse_max).into_par_iter().map(|n| integrality_check(p, n, 50)))?);
    }
    Ok(tally)
}

/// Unrefined gap bounds on every pair `l < l2`, seeded refined triples with
/// a nearby weight, and seeded distance-criterion pairs.
fn delta(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    let an = DeltaAnalyzer::new(ctx.clone());
    an.prefill(cfg.kb_max);
    let p = ctx.p();
    let unrefined = collect((0..=cfg.kb_max).into_par_iter().flat_map_iter(|kb| {
        let k = ctx.weight(kb);
        let h = an.table(k).map(|t| t.half_new()).unwrap_or(0);
        let an = &an;
        (0..h).flat_map(move |l| (l + 1..=h).map(move |l2| an.delta_gap_check(k, l, l, l2, None)))
    }))?;
    let mut rng = rng_for(ctx, cfg.seed, 4);
    let mut refined_jobs = Vec::new();
    for kb in 0..=cfg.kb_max {
        let h = an.table(ctx.weight(kb))?.half_new();
        if h == 0 {
            continue;
        }
        for _ in 0..cfg.samples {
            let l = rng.gen_range(0..h);
            let l1 = rng.gen_range(l..=h);
            let l2 = rng.gen_range(l1.max(l + 1)..=h);
            let j = rng.gen_range(1..=3);
            let kbp = kb + j * p.pow(rng.gen_range(0..3));
            refined_jobs.push((kb, l, l1, l2, kbp));
        }
    }
    let refined = collect(refined_jobs.into_par_iter().map(|(kb, l, l1, l2, kbp)| {
        an.delta_gap_check(ctx.weight(kb), l, l1, l2, Some(ctx.weight(kbp)))
    }))?;
    let distance_jobs: Vec<(i64, i64)> = (0..cfg.samples * 4)
        .map(|_| (rng.gen_range(1..=cfg.kb_max.max(1)), rng.gen_range(0..=cfg.kb_max)))
        .collect();
    let distance = collect(distance_jobs.into_par_iter().map(|(kb, kbp)| {
        an.wk_distance_criterion(ctx.weight(kb), ctx.weight(kbp))
    }))?;
    Ok(unrefined.merge(refined).merge(distance))
}

/// Harmonicity at seeded `(n, k0, μ)` with `μ` a positive rational of small
/// height.
fn harmonic(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    let mut rng = rng_for(ctx, cfg.seed, 5);
    let jobs: Vec<(u64, i64, BigRational)> = (0..cfg.samples)
        .map(|_| {
            let den = rng.gen_range(1..=3);
            let mu = q(rng.gen_range(1..=4 * den), den);
            (rng.gen_range(1..=cfg.n_max), rng.gen_range(2..=ctx.weight(cfg.kb_max)), mu)
        })
        .collect();
    let series = GhostSeries::new(ctx.clone());
    collect(jobs.par_iter().map(|(n, k0, mu)| harmonicity_check(&series, *n, *k0, mu)))
}

/// Theta shift at every weight up to `w(kb_max)`, the pairing identity that
/// applies there, and the matrix involution on the disk.
fn al_theta_pstab(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    let top = ctx.weight(cfg.kb_max);
    collect((2..=top).into_par_iter().flat_map_iter(|k0| {
        let mut out: Vec<Result<Verdict>> = match compatibility_checks(ctx, k0, 5) {
            Ok(vs) => vs.into_iter().map(Ok).collect(),
            Err(e) => vec![Err(e)],
        };
        if ctx.kbullet(k0).is_ok() {
            out.push(al_involution_check(ctx, k0));
        }
        out
    }))
}

/// With rows and columns `{1..n}` inside the new block, the corank bound
/// equals the ghost multiplicity.
fn corank(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    collect((0..=cfg.kb_max).into_par_iter().flat_map_iter(|kb| {
        let k = ctx.weight(kb);
        let (ur, iw) = (ctx.d_ur(k).unwrap_or(0), ctx.d_iw(k).unwrap_or(0));
        ((ur + 1)..(iw - ur)).map(move |n| {
            let set = IndexSet::initial(n as u64);
            let bound = corank_bound(ctx, &set, &set, k)?;
            let mult = ctx.multiplicity(n as u64, k)? as i64;
            Ok(Verdict::check(bound.corank == mult, "corank", vec![ctx.p(), ctx.a(), ctx.s(), kb, n], || {
                format!("bound {} vs multiplicity {mult}", bound.corank)
            }))
        })
    }))
}

/// `g_n` equals the companion's `g_{n'}` with `n'` the shifted index.
fn companion(ctx: &GhostContext, cfg: &SweepConfig) -> Result<Tally> {
    let other = ctx.companion()?;
    let back = other.companion()?;
    let mut tally = Tally::default();
    tally.add(Verdict::check(
        back.a() == ctx.a() && back.s() == ctx.s(),
        "companion involution",
        vec![ctx.p(), ctx.a(), ctx.s(), 0],
        || format!("companion of companion is a={} s={}", back.a(), back.s()),
    ));
    for n in 1..=cfg.n_max {
        let here = ctx.ghost_coefficient(n)?;
        let m = ctx.companion_index(n);
        let there = if m == 0 { Default::default() } else { other.ghost_coefficient(m)?.zeros };
        tally.add(Verdict::check(here.zeros == there, "companion series", vec![ctx.p(), ctx.a(), ctx.s(), n as i64], || {
            format!("g_{n} differs from companion g_{m}")
        }));
    }
    Ok(tally)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suite: Suite) -> SweepConfig {
        SweepConfig {
            primes: vec![7],
            a: Some(2),
            kb_max: 20,
            n_max: 12,
            samples: 20,
            dist_points: vec![10, 20, 40],
            ..SweepConfig::defaults(suite)
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!(Suite::ALL.len(), 12);
    }

    #[test]
    fn slack_fixture_loads() {
        assert!(default_slack() > 0.0);
    }

    #[test]
    fn small_sweeps_pass() {
        for suite in Suite::ALL {
            if matches!(suite, Suite::Dist | Suite::Mahler) {
                continue;
            }
            let report = run_in_current_pool(suite, &small(suite)).unwrap();
            assert!(report.tally.ok(), "{suite}: {:?}", report.tally.first_failure);
            assert!(report.tally.passed > 0, "{suite} ran nothing");
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let cfg = small(Suite::Vertex);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_in_current_pool(Suite::Vertex, &cfg)).unwrap();
        let b = four.install(|| run_in_current_pool(Suite::Vertex, &cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dist_reports_metrics_per_point() {
        let cfg = SweepConfig { s: Some(0), ..small(Suite::Dist) };
        let report = run_in_current_pool(Suite::Dist, &cfg).unwrap();
        assert_eq!(report.metrics.len(), 2 * cfg.dist_points.len());
        // Middle block and drift verdicts, then one trend verdict.
        let t = &report.tally;
        assert_eq!(t.passed + t.failed, cfg.dist_points.len() as u64 + 1);
    }

    #[test]
    fn gm_pairs_are_admissible() {
        let cfg = SweepConfig { samples: 5, m_values: vec![4], kb_max: 30, ..SweepConfig::defaults(Suite::Gm) };
        let t = run_in_current_pool(Suite::Gm, &cfg).unwrap().tally;
        assert_eq!((t.passed, t.inapplicable, t.failed), (10, 0, 0));
    }

    #[test]
    fn worker_setting_parser() {
        assert_eq!(parse_workers(" 3 ").unwrap(), 3);
        assert!(parse_workers("0").is_err());
        assert!(parse_workers("many").is_err());
    }
}
