//! Exact lower convex hulls and the Newton polygons built from them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{GhostError, Result};
use crate::padic::Rat;

/// Lower convex hull of points sorted by strictly increasing `x`, returned as
/// the subsequence of vertices. Collinear interior points are dropped.
pub(crate) fn lower_hull(points: &[(i64, BigRational)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        while hull.len() >= 2 {
            let (a, b) = (&points[hull[hull.len() - 2]], &points[hull[hull.len() - 1]]);
            let c = &points[i];
            // b is dropped when it lies on or above the chord a-c.
            let lhs = (&b.1 - &a.1) * BigInt::from(c.0 - a.0);
            let rhs = (&c.1 - &a.1) * BigInt::from(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// A finite Newton polygon starting at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    vertices: Vec<(u64, BigRational)>,
}

/// Serialized as the vertex list `[[x, "num/den"], ...]`.
impl Serialize for NewtonPolygon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.vertices.len()))?;
        for (x, y) in &self.vertices {
            seq.serialize_element(&(x, Rat::Finite(y.clone())))?;
        }
        seq.end()
    }
}

impl Default for NewtonPolygon {
    fn default() -> Self {
        NewtonPolygon {
            vertices: vec![(0, BigRational::zero())],
        }
    }
}

impl NewtonPolygon {
    /// Lower convex hull of `points`, ignoring infinite ordinates. The set must
    /// have distinct abscissae and contain `(0, 0)`.
    pub fn hull(points: &[(u64, Rat)]) -> Result<Self> {
        let mut finite: Vec<(i64, BigRational)> = Vec::with_capacity(points.len());
        let mut xs: Vec<u64> = points.iter().map(|p| p.0).collect();
        xs.sort_unstable();
        if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
            return Err(GhostError::DuplicateAbscissa(w[0]));
        }
        if !points.iter().any(|(x, y)| *x == 0 && *y == Rat::zero()) {
            return Err(GhostError::MissingOrigin);
        }
        for (x, y) in points {
            if let Rat::Finite(v) = y {
                finite.push((*x as i64, v.clone()));
            }
        }
        finite.sort_by_key(|p| p.0);
        Ok(Self::from_sorted_finite(finite))
    }

    pub(crate) fn from_sorted_finite(points: Vec<(i64, BigRational)>) -> Self {
        let idx = lower_hull(&points);
        let vertices = idx
            .into_iter()
            .map(|i| (points[i].0 as u64, points[i].1.clone()))
            .collect();
        NewtonPolygon { vertices }
    }

    /// Polygon with the given `(slope, multiplicity)` segments in any order.
    pub fn from_segments(mut segments: Vec<(BigRational, u64)>) -> Self {
        segments.retain(|s| s.1 > 0);
        segments.sort_by(|a, b| a.0.cmp(&b.0));
        let mut np = NewtonPolygon::default();
        for (slope, len) in segments {
            np.push_segment(slope, len);
        }
        np
    }

    fn push_segment(&mut self, slope: BigRational, len: u64) {
        let (x, y) = self.vertices.last().cloned().expect("origin present");
        let next = (x + len, &y + &slope * BigInt::from(len));
        if self.vertices.len() >= 2 {
            let (px, py) = &self.vertices[self.vertices.len() - 2];
            let prev = (&y - py) / BigInt::from(x - px);
            if prev == slope {
                *self.vertices.last_mut().unwrap() = next;
                return;
            }
        }
        self.vertices.push(next);
    }

    pub fn vertices(&self) -> &[(u64, BigRational)] {
        &self.vertices
    }

    /// Horizontal length (the abscissa of the last vertex).
    pub fn length(&self) -> u64 {
        self.vertices.last().map_or(0, |v| v.0)
    }

    /// `(slope, length)` for each edge, in increasing slope order.
    pub fn segments(&self) -> Vec<(BigRational, u64)> {
        self.vertices
            .windows(2)
            .map(|w| {
                let len = w[1].0 - w[0].0;
                ((&w[1].1 - &w[0].1) / BigInt::from(len), len)
            })
            .collect()
    }

    /// The slope multiset as a sorted list.
    pub fn slopes(&self) -> Vec<BigRational> {
        self.segments()
            .into_iter()
            .flat_map(|(s, len)| std::iter::repeat_n(s, len as usize))
            .collect()
    }

    /// The `i`-th slope, 1-indexed.
    pub fn slope(&self, i: u64) -> Option<BigRational> {
        if i == 0 {
            return None;
        }
        let mut acc = 0;
        for (s, len) in self.segments() {
            acc += len;
            if i <= acc {
                return Some(s);
            }
        }
        None
    }

    pub fn is_vertex(&self, x: u64) -> bool {
        self.vertices.iter().any(|v| v.0 == x)
    }

    /// Ordinate of the polygon at abscissa `x` in `[0, length]`.
    pub fn value_at(&self, x: u64) -> Option<BigRational> {
        let pos = self.vertices.iter().position(|v| v.0 >= x)?;
        let (vx, vy) = &self.vertices[pos];
        if *vx == x {
            return Some(vy.clone());
        }
        let (ux, uy) = &self.vertices[pos - 1];
        let slope = (vy - uy) / BigInt::from(vx - ux);
        Some(uy + slope * BigInt::from(x - ux))
    }

    /// The part of the polygon over `[0, count]`.
    pub fn truncate(&self, count: u64) -> NewtonPolygon {
        if count >= self.length() {
            return self.clone();
        }
        let mut vertices: Vec<_> = self.vertices.iter().filter(|v| v.0 < count).cloned().collect();
        vertices.push((count, self.value_at(count).expect("inside range")));
        NewtonPolygon { vertices }
    }

    /// Scales both coordinates by `m`.
    pub fn stretch(&self, m: u64) -> NewtonPolygon {
        assert!(m > 0, "stretch factor must be positive");
        let f = BigInt::from(m);
        NewtonPolygon {
            vertices: self.vertices.iter().map(|(x, y)| (x * m, y * &f)).collect(),
        }
    }

    /// Polygon whose slope multiset is the union of both.
    pub fn merge(&self, other: &NewtonPolygon) -> NewtonPolygon {
        let mut segs = self.segments();
        segs.extend(other.segments());
        NewtonPolygon::from_segments(segs)
    }

    /// Number of slopes equal to `s`.
    pub fn multiplicity_of(&self, s: &BigRational) -> u64 {
        self.segments().iter().filter(|seg| &seg.0 == s).map(|seg| seg.1).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{q, qi};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[(u64, i64)]) -> Vec<(u64, Rat)> {
        v.iter().map(|&(x, y)| (x, Rat::int(y))).collect()
    }

    #[test]
    fn small_hulls() {
        let np = NewtonPolygon::hull(&pts(&[(0, 0)])).unwrap();
        assert!(np.slopes().is_empty());
        let np = NewtonPolygon::hull(&pts(&[(0, 0), (1, 0), (2, 3)])).unwrap();
        assert_eq!(np.slopes(), vec![qi(0), qi(3)]);
        assert!(NewtonPolygon::hull(&pts(&[(0, 0), (1, 0), (1, 3)])).is_err());
        assert!(NewtonPolygon::hull(&pts(&[(0, 1), (1, 0)])).is_err());
        let with_inf = vec![(0, Rat::zero()), (1, Rat::Infinity), (2, Rat::int(2))];
        let np = NewtonPolygon::hull(&with_inf).unwrap();
        assert_eq!(np.slopes(), vec![qi(1), qi(1)]);
        assert_eq!(np.vertices().len(), 2);
    }

    #[test]
    fn stretch_and_merge() {
        let a = NewtonPolygon::hull(&pts(&[(0, 0), (1, 0), (2, 3)])).unwrap();
        assert_eq!(a.stretch(1), a);
        assert_eq!(a.merge(&NewtonPolygon::default()), a);
        let b = NewtonPolygon::from_segments(vec![(qi(1), 1)]);
        assert_eq!(a.merge(&b).slopes(), vec![qi(0), qi(1), qi(3)]);
        assert_eq!(a.stretch(2).slopes(), vec![qi(0), qi(0), qi(3), qi(3)]);
        assert_eq!(a.truncate(1).slopes(), vec![qi(0)]);
        let c = NewtonPolygon::from_segments(vec![(q(3, 2), 3)]);
        assert_eq!(c.truncate(2).vertices(), &[(0, qi(0)), (2, qi(3))]);
        assert_eq!(c.slope(3), Some(q(3, 2)));
        assert_eq!(c.slope(4), None);
    }

    // Cubic brute force: a point is a vertex unless some chord over it passes
    // at or below it; endpoints are always vertices.
    fn brute_vertices(points: &[(i64, BigRational)]) -> Vec<i64> {
        let n = points.len();
        let mut out = Vec::new();
        for i in 0..n {
            let mut covered = false;
            for j in 0..i {
                for k in i + 1..n {
                    let (xj, yj) = &points[j];
                    let (xi, yi) = &points[i];
                    let (xk, yk) = &points[k];
                    let chord = yj + (yk - yj) * BigInt::from(xi - xj) / BigInt::from(xk - xj);
                    if &chord <= yi {
                        covered = true;
                    }
                }
            }
            if !covered {
                out.push(points[i].0);
            }
        }
        out
    }

    #[test]
    fn random_hulls_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let mut points = vec![(0i64, qi(0))];
            let mut x = 0;
            for _ in 1..50 {
                x += rng.gen_range(1..4);
                points.push((x, q(rng.gen_range(-40..400), rng.gen_range(1..4))));
            }
            let hull = NewtonPolygon::from_sorted_finite(points.clone());
            let xs: Vec<i64> = hull.vertices().iter().map(|v| v.0 as i64).collect();
            assert_eq!(xs, brute_vertices(&points));
        }
    }

    proptest! {
        #[test]
        fn hull_is_idempotent_and_convex(ys in proptest::collection::vec(-50i64..200, 1..40)) {
            let mut points = vec![(0u64, Rat::zero())];
            points.extend(ys.iter().enumerate().map(|(i, &y)| (i as u64 + 1, Rat::frac(y, 2))));
            let np = NewtonPolygon::hull(&points).unwrap();
            let again: Vec<(u64, Rat)> = np.vertices().iter().map(|(x, y)| (*x, Rat::Finite(y.clone()))).collect();
            prop_assert_eq!(NewtonPolygon::hull(&again).unwrap(), np.clone());
            let segs = np.segments();
            prop_assert!(segs.windows(2).all(|w| w[0].0 < w[1].0));
            for (x, y) in &points {
                let below = np.value_at(*x).unwrap();
                prop_assert!(&below <= y.expect_finite());
            }
        }

        #[test]
        fn merge_is_multiset_union(a in proptest::collection::vec((-20i64..20, 1u64..4), 0..6),
                                   b in proptest::collection::vec((-20i64..20, 1u64..4), 0..6)) {
            let pa = NewtonPolygon::from_segments(a.iter().map(|&(s, l)| (qi(s), l)).collect());
            let pb = NewtonPolygon::from_segments(b.iter().map(|&(s, l)| (qi(s), l)).collect());
            let mut want = pa.slopes();
            want.extend(pb.slopes());
            want.sort();
            prop_assert_eq!(pa.merge(&pb).slopes(), want);
        }
    }
}
