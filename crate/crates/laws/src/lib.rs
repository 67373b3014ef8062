//! Simulation laws ζ whose cumulant function is the convex conjugate of a
//! divergence generator, their block sums `ζ^{*ν}`, exponentially tilted
//! versions, and importance-sampling factors.
//!
//! Randomness always comes from an explicitly passed generator; [`rng::stream`]
//! provides reproducible, non-overlapping streams.

pub mod block;
pub mod diagnostics;
pub mod error;
pub mod law;
pub mod rng;
pub mod stable;

pub use block::{BlockSampler, LatticePmf};
pub use diagnostics::{check_mean_one, convolution_ks, KsReport, MeanOneReport, MgfCheck};
pub use error::{LawError, Result};
pub use law::WeightLaw;
