//! Multi-band RF coexistence simulation: scene geometry, ray tracing,
//! aperture-limited planar arrays, link budgets, coverage maps, incumbent
//! interference Monte Carlo and a spectrum allocation registry.

pub mod antenna;
pub mod config;
pub mod coverage;
pub mod deployment;
pub mod error;
pub mod geometry;
pub mod link;
pub mod parallel;
pub mod pipeline;
pub mod raytrace;
pub mod render;
pub mod rfi;
pub mod scene;
pub mod spectrum;
pub mod synthetic;

pub use error::{Error, ErrorClass, Result};
