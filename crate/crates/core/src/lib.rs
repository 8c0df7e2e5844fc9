//! Ghost series of reducible generic local data: exact dimension formulas,
//! ghost zeros, Newton polygons at Gaussian points of the weight disk, and
//! checkers for the combinatorial slope statements built on them.

pub mod delta;
pub mod error;
pub mod ghost;
pub mod mahler;
pub mod newton;
pub mod padic;
pub mod series;
pub mod suites;
pub mod theorems;
pub mod verdict;
pub mod weight;

pub use delta::{DeltaAnalyzer, DeltaTable, NearSteinbergRange, PuncturedAtlas};
pub use error::{GhostError, Result};
pub use ghost::{CompanionRelation, GhostCoefficient, GhostContext};
pub use mahler::{MahlerBasis, RatPoly};
pub use newton::NewtonPolygon;
pub use padic::{PDigits, Rat};
pub use series::{ghost_np, vp_ghost, GhostSeries, GlobalMultiplicity};
pub use weight::WeightPoint;
pub use theorems::{CorankBound, IndexSet, SlopeStats};
pub use verdict::{Counterexample, Tally, Verdict};
