//! Regenerates `fixtures/distribution_slack.json`.
//!
//! Sweeps every local datum for a few primes, measures the worst outer
//! slope drift relative to `log_p k`, and records that ratio with a safety
//! margin as the default slack. Run with
//! `cargo run --release -p ghost-slopes --example derive_slack > crates/core/fixtures/distribution_slack.json`.

use ghost_slopes::theorems::distribution;
use ghost_slopes::GhostContext;
use rayon::prelude::*;
use serde_json::json;

const PRIMES: [u64; 3] = [7, 11, 13];
const KB_MAX: i64 = 200;
const MARGIN: f64 = 1.5;

fn main() {
    let mut jobs = Vec::new();
    for p in PRIMES {
        let pi = p as i64;
        for a in 1..=pi - 4 {
            for s in 0..=pi - 2 {
                jobs.push(GhostContext::new(p, a, 0, s).expect("generic datum"));
            }
        }
    }
    let (ratio, worst) = jobs
        .par_iter()
        .flat_map_iter(|ctx| (1..=KB_MAX).map(move |kb| (ctx, kb)))
        .map(|(ctx, kb)| {
            let k = ctx.weight(kb);
            let stats = distribution(ctx, k).expect("on-disk weight");
            let (_, drift) = stats.outer_drift();
            let ratio = drift / ((k as f64).ln() / (ctx.p() as f64).ln());
            (ratio, vec![ctx.p(), ctx.a(), ctx.s(), kb])
        })
        .reduce(|| (0.0, Vec::new()), |x, y| if y.0 > x.0 { y } else { x });
    let slack = (ratio * MARGIN * 10.0).ceil() / 10.0;
    let out = json!({
        "slack": slack,
        "observed_max_ratio": (ratio * 1e6).round() / 1e6,
        "worst_instance": worst,
        "margin": MARGIN,
        "primes": PRIMES,
        "kb_max": KB_MAX,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
}
