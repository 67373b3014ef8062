//! Exact evaluation of φ-divergences, Hellinger integrals, Rényi-type
//! transforms and entropy families, together with the construction of a
//! generator and its cumulant function from a monotone derivative map.
//!
//! All functions are pure. `f64::INFINITY` is a regular return value for
//! divergences and generators outside their effective domain.

pub mod divergence;
pub mod entropy;
pub mod error;
pub mod generator;
pub mod legendre;
pub mod numeric;
pub mod scaling;
pub mod vector;

pub use divergence::{
    divergence, escort_renyi, hellinger_integral, modified_kl, modified_rev_kl, normalize_bs1,
    renyi, renyi_transform, weighted_divergence, HTransform,
};
pub use entropy::{entropy, EntropyFamily, Extremum};
pub use error::{Error, Result};
pub use generator::{DivergenceGenerator, GeneratorConfig};
pub use legendre::{
    build_lambda, build_phi, closed_form_cumulant, legendre_transform, CumulantFunction,
    CumulantMethod, GeneratorSpec, ScalarFn,
};
pub use scaling::{min_over_m_closed, min_over_m_numeric, MinOverM};
pub use vector::{flatten_matrix, unflatten, NonNegVector, ProbVector};
