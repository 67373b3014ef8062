//! Bare-simulation estimators for constrained minimization of φ-divergences.
//!
//! A problem is a [`BsSetup`]: a generator φ, its simulation law, a positive
//! vector `P` and a constraint set Ω. The estimators simulate block sums of
//! weights drawn from the law, optionally tilted toward a dominating point,
//! and turn `P(ξ ∈ Ω)` into `inf_Ω D_φ(Q, P)` through the large-deviation
//! rate.

pub mod bounds;
pub mod constraint;
pub mod error;
pub mod estimator;
pub mod invert;
pub mod oracle;
pub mod partition;
pub mod pipeline;
pub mod problems;
pub mod proxy;
pub mod simlaw;

pub use bounds::{bounds_general, Bounds};
pub use constraint::{AffineProjector, ConstraintSet, ConstraintSpec, Sense};
pub use error::{EngineError, Result};
pub use estimator::{is_estimate, naive_estimate, simulate, BsSetup, Estimate, Mode, SimConfig};
pub use invert::{invert, Target};
pub use oracle::{exact_pi, grid_min_divergence, grid_scan, golden_min, ExactPi, GridDomain, GridResult};
pub use partition::{ingest_sample, partition, xi_vectors, BlockPartition, StreamIngest};
pub use pipeline::{run, BsConfig};
pub use proxy::{descend, dominating_point, find_proxy, ProxyConfig, ProxyMethod, ProxyPoint};
pub use simlaw::{BlockDraw, SimulationLaw, UnitLaw};
pub use problems::{reduce, solve, ProblemInstance, ProblemReport, Reduction, SolveConfig};
