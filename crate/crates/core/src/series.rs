//! Evaluation of ghost coefficients at Gaussian points and certified Newton
//! polygons of the specialized ghost series.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{GhostError, Result};
use crate::ghost::GhostContext;
use crate::newton::NewtonPolygon;
use crate::padic::Rat;
use crate::weight::WeightPoint;

/// Largest number of coefficients examined while certifying a polygon.
pub const NP_CAP: usize = 1 << 14;

/// A ghost series with a shared cache of coefficient degrees.
#[derive(Debug)]
pub struct GhostSeries {
    ctx: GhostContext,
    degrees: RwLock<Vec<u64>>,
}

impl Clone for GhostSeries {
    fn clone(&self) -> Self {
        GhostSeries {
            ctx: self.ctx.clone(),
            degrees: RwLock::new(self.degrees.read().unwrap().clone()),
        }
    }
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(m)
}

impl GhostSeries {
    pub fn new(ctx: GhostContext) -> Self {
        GhostSeries {
            ctx,
            degrees: RwLock::new(vec![0]),
        }
    }

    /// A process-wide instance for `ctx`, so sweeps that revisit the same
    /// local datum share one degree memo.
    pub fn shared(ctx: &GhostContext) -> Arc<GhostSeries> {
        type Registry = Mutex<HashMap<(i64, i64, i64, i64), Arc<GhostSeries>>>;
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        let key = (ctx.p(), ctx.a(), ctx.b(), ctx.s());
        let mut map = REGISTRY.get_or_init(Default::default).lock().unwrap();
        map.entry(key).or_insert_with(|| Arc::new(GhostSeries::new(ctx.clone()))).clone()
    }

    pub fn context(&self) -> &GhostContext {
        &self.ctx
    }

    /// `deg g_n`, memoized.
    pub fn degree(&self, n: u64) -> u64 {
        let n = n as usize;
        if let Some(&d) = self.degrees.read().unwrap().get(n) {
            return d;
        }
        let mut cache = self.degrees.write().unwrap();
        while cache.len() <= n {
            let next = cache.len() as u64;
            cache.push(self.ctx.ghost_degree(next));
        }
        cache[n]
    }

    /// Total multiplicity of the zeros `w_k` of `g_n` with `p^j | k0 - k`.
    pub fn congruent_mass(&self, n: u64, k0: i64, j: u32) -> u64 {
        if j == 0 {
            return self.degree(n);
        }
        let p = self.ctx.p() as i128;
        let (lo, hi) = self.ctx.zero_window(n);
        let modulus = p.pow(j);
        // (p-1) kb = k0 - k_eps  (mod p^j)
        let target = ((k0 - self.ctx.k_eps()) as i128 * mod_inverse(p - 1, modulus)).rem_euclid(modulus);
        let start = lo as i128 + (target - lo as i128).rem_euclid(modulus);
        let mut total = 0u64;
        let mut kb = start;
        while kb < hi as i128 {
            total += self.ctx.mult_kb(n as i64, kb as i64) as u64;
            kb += modulus;
        }
        total
    }

    /// `v_p(g_n(w))` at a Gaussian point, with `g_0 = 1`.
    ///
    /// Writes `min(r, 1 + v)` as a sum of layers `clamp(r - i, 0, 1)` over
    /// `i <= v`, so the valuation is the sum over `i` of the layer weight
    /// times the mass of zeros congruent to the center modulo `p^i`.
    pub fn vp_ghost(&self, n: u64, w: &WeightPoint) -> Rat {
        if n == 0 || self.degree(n) == 0 {
            return Rat::zero();
        }
        let k0 = w.center();
        if w.is_classical() {
            if let Ok(kb) = self.ctx.kbullet(k0) {
                if self.ctx.mult_kb(n as i64, kb) > 0 {
                    return Rat::Infinity;
                }
            }
        }
        let one = BigRational::one();
        let mut total = BigRational::zero();
        let mut i = 0u32;
        loop {
            let layer = match w.radius() {
                Rat::Infinity => one.clone(),
                Rat::Finite(r) => {
                    let t = r - BigRational::from_integer(BigInt::from(i));
                    if t <= BigRational::zero() {
                        break;
                    }
                    t.min(one.clone())
                }
            };
            let mass = self.congruent_mass(n, k0, i);
            if mass == 0 {
                break;
            }
            total += layer * BigInt::from(mass);
            i += 1;
        }
        Rat::Finite(total)
    }

    /// Newton polygon up to its first vertex at or beyond `count`, certified
    /// against every coefficient not examined.
    ///
    /// Each factor has valuation at least `c = min(r, 1)`, so `v(g_n) >= c deg g_n`
    /// for all `n`, and this bound is convex because degree increments strictly
    /// increase. Once the bound at `N+1` clears the last relevant hull edge and
    /// its slope there is at least that edge's slope, no later point can cut in.
    pub fn ghost_np_certified(&self, w: &WeightPoint, count: usize) -> Result<NewtonPolygon> {
        if count == 0 {
            return Err(GhostError::InvalidArgument("count must be positive".into()));
        }
        if count > NP_CAP {
            return Err(GhostError::StabilityFailure { count, cap: NP_CAP });
        }
        let c = match w.radius() {
            Rat::Infinity => BigRational::one(),
            Rat::Finite(r) => r.clone().min(BigRational::one()),
        };
        let mut values: Vec<Rat> = Vec::new();
        let mut n_max = (2 * count + 8).clamp(16, NP_CAP);
        loop {
            while values.len() <= n_max {
                values.push(self.vp_ghost(values.len() as u64, w));
            }
            let points: Vec<(i64, BigRational)> = values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.as_finite().map(|y| (i as i64, y.clone())))
                .collect();
            let np = NewtonPolygon::from_sorted_finite(points);
            let verts = np.vertices();
            if let Some(pos) = verts.iter().position(|v| v.0 as usize >= count) {
                let (xv, yv) = &verts[pos];
                let (xu, yu) = &verts[pos - 1];
                let s_in = (yv - yu) / BigInt::from(xv - xu);
                let n1 = n_max as u64 + 1;
                let d1 = BigInt::from(self.degree(n1));
                let d2 = BigInt::from(self.degree(n1 + 1));
                let bound1 = &c * &d1;
                let line = yv + &s_in * BigInt::from(n1 - xv);
                if bound1 > line && &c * (d2 - d1) >= s_in {
                    let kept = verts[..=pos].to_vec();
                    return Ok(NewtonPolygon::from_sorted_finite(
                        kept.into_iter().map(|(x, y)| (x as i64, y)).collect(),
                    ));
                }
            }
            if n_max >= NP_CAP {
                return Err(GhostError::StabilityFailure { count, cap: NP_CAP });
            }
            n_max = (2 * n_max).min(NP_CAP);
        }
    }

    /// The first `count` slopes of the Newton polygon of `G(w, t)`.
    pub fn ghost_np(&self, w: &WeightPoint, count: usize) -> Result<NewtonPolygon> {
        Ok(self.ghost_np_certified(w, count)?.truncate(count as u64))
    }

    /// The ghost polygon stretched by `m`, with the slope-zero part resized to
    /// `m_prime` or `m_second` for split data on the two exceptional disks.
    pub fn global_np(
        &self,
        w: &WeightPoint,
        mult: GlobalMultiplicity,
        count: usize,
    ) -> Result<NewtonPolygon> {
        let GlobalMultiplicity { m, m_prime, m_second, split } = mult;
        if m == 0 {
            return Err(GhostError::Multiplicity("m must be positive".into()));
        }
        if split && m_prime + m_second != m {
            return Err(GhostError::Multiplicity(format!(
                "{m_prime} + {m_second} != {m}"
            )));
        }
        let base = self.ghost_np(w, count + 1)?;
        let mut stretched = base.stretch(m);
        let zero_len = if !split {
            None
        } else if self.ctx.s() == 0 {
            Some(m_prime)
        } else if self.ctx.s() == self.ctx.p() - 2 - self.ctx.a() {
            Some(m_second)
        } else {
            None
        };
        if let Some(len) = zero_len {
            let mut segs: Vec<_> = stretched.segments().into_iter().filter(|s| !s.0.is_zero()).collect();
            segs.push((BigRational::zero(), len));
            stretched = NewtonPolygon::from_segments(segs);
        }
        Ok(stretched.truncate(count as u64))
    }
}

/// Multiplicities of a global module: `m` in general, `m = m' + m''` when split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobalMultiplicity {
    pub m: u64,
    pub m_prime: u64,
    pub m_second: u64,
    pub split: bool,
}

impl GlobalMultiplicity {
    pub fn nonsplit(m: u64) -> Self {
        GlobalMultiplicity { m, m_prime: 0, m_second: 0, split: false }
    }

    pub fn split(m_prime: u64, m_second: u64) -> Self {
        GlobalMultiplicity { m: m_prime + m_second, m_prime, m_second, split: true }
    }
}

/// `v_p(g_n(w))` without keeping a cache around.
pub fn vp_ghost(ctx: &GhostContext, n: u64, w: &WeightPoint) -> Rat {
    GhostSeries::shared(ctx).vp_ghost(n, w)
}

/// First `count` slopes of `NP(G(w, -))`.
pub fn ghost_np(ctx: &GhostContext, w: &WeightPoint, count: usize) -> Result<NewtonPolygon> {
    GhostSeries::shared(ctx).ghost_np(w, count)
}
