//! Latency-oriented simulation of a pinched-waveguide downlink with
//! content-aware rate splitting.
//!
//! The math modules ([`geometry`], [`content`], [`rates`], [`solver`],
//! [`baselines`]) are generic over the scalar type through [`scalar::Real`];
//! the experiment harness pins `f64`. The aliases below fix the common
//! concrete choices.

pub mod baselines;
pub mod config;
pub mod content;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod rates;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};

/// Default scalar of the experiment harness.
pub type Scalar = f64;

pub type Point3 = geometry::Point3<Scalar>;
pub type Geometry = geometry::Geometry<Scalar>;
pub type RadioConstants = geometry::RadioConstants<Scalar>;
pub type ChannelState = geometry::ChannelState<Scalar>;
pub type Catalog = content::Catalog<Scalar>;
pub type RequestPmf = content::RequestPmf<Scalar>;
pub type PowerBudget = rates::PowerBudget<Scalar>;
pub type RateAllocation = rates::RateAllocation<Scalar>;
pub type LinkEnv = solver::LinkEnv<Scalar>;
pub type SolverConfig = solver::SolverConfig<Scalar>;
pub type StateSolution = solver::StateSolution<Scalar>;

/// Single-precision variants for callers trading accuracy for footprint.
pub mod f32 {
    pub type Point3 = crate::geometry::Point3<f32>;
    pub type Geometry = crate::geometry::Geometry<f32>;
    pub type RadioConstants = crate::geometry::RadioConstants<f32>;
    pub type Catalog = crate::content::Catalog<f32>;
    pub type LinkEnv = crate::solver::LinkEnv<f32>;
    pub type SolverConfig = crate::solver::SolverConfig<f32>;
    pub type StateSolution = crate::solver::StateSolution<f32>;
}
