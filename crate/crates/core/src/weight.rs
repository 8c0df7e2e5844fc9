//! Gaussian points of the weight disk.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{GhostError, Result};
use crate::padic::{vp_int, Rat};

/// The Gaussian point of the closed disk of radius `p^(-radius)` around the
/// classical point `w_center`. An infinite radius is the classical point
/// itself; center 2 with radius below 1 lies in the boundary annulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightPoint {
    center: i64,
    radius: Rat,
}

impl WeightPoint {
    pub fn new(center: i64, radius: Rat) -> Result<Self> {
        match &radius {
            Rat::Finite(r) if !r.is_positive() => {
                Err(GhostError::InvalidRadius(format!("{radius} is not positive")))
            }
            _ => Ok(WeightPoint { center, radius }),
        }
    }

    pub fn classical(center: i64) -> Self {
        WeightPoint { center, radius: Rat::Infinity }
    }

    pub fn center(&self) -> i64 {
        self.center
    }

    pub fn radius(&self) -> &Rat {
        &self.radius
    }

    pub fn is_classical(&self) -> bool {
        self.radius.is_infinite()
    }

    /// `v_p(w - w_k)` at this point: `min(r, 1 + v_p(center - k))`.
    pub fn vp_diff(&self, p: u64, k: i64) -> Rat {
        if k == self.center {
            return self.radius.clone();
        }
        let v = vp_int((self.center - k) as i128, p).expect("nonzero difference");
        Rat::int(1 + v as i64).min(self.radius.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(WeightPoint::classical(10).vp_diff(7, 16), Rat::int(1));
        assert_eq!(WeightPoint::classical(10).vp_diff(7, 10), Rat::Infinity);
        let halo = WeightPoint::new(2, Rat::frac(1, 2)).unwrap();
        for k in [3, 9, 100, 2 + 49] {
            assert_eq!(halo.vp_diff(7, k), Rat::frac(1, 2));
        }
        assert_eq!(WeightPoint::classical(2).vp_diff(7, 2 + 6 * 49), Rat::int(3));
        assert!(WeightPoint::new(2, Rat::zero()).is_err());
        assert!(WeightPoint::new(2, Rat::int(-1)).is_err());
    }

    proptest! {
        // Two Gaussian points of equal radius describe the same disk when
        // their centers are at least that close.
        #[test]
        fn same_disk_same_valuations(k0 in 2i64..5000, j in 0u32..4, t in 1i64..50, num in 1i64..20, den in 1i64..5, k in 2i64..5000) {
            let p = 7u64;
            let r = Rat::frac(num, den);
            let k1 = k0 + t * (p as i64).pow(j);
            prop_assume!(k != k0 && k != k1);
            let close = Rat::int(1 + vp_int((k0 - k1) as i128, p).unwrap() as i64);
            prop_assume!(close >= r);
            let a = WeightPoint::new(k0, r.clone()).unwrap();
            let b = WeightPoint::new(k1, r).unwrap();
            prop_assert_eq!(a.vp_diff(p, k), b.vp_diff(p, k));
        }
    }
}
