//! Finite-element simulation of quasistatic frictionless contact between a
//! linearly viscoelastic body with long memory and a rigid-plastic
//! foundation, solved per time step as a nonsmooth convex minimization,
//! with a verification layer certifying the displacement, stress and strain
//! formulations against each other.
//!
//! The core is generic over the scalar type (`scalar::Real`, implemented by
//! `f32` and `f64`); the concrete `f64` aliases below are what the binary
//! and acceptance suite use.

pub mod assemble;
pub mod config;
pub mod contact;
pub mod driver;
pub mod geometry;
pub mod history;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod oracle;
pub mod output;
pub mod scalar;
pub mod solver;
pub mod tensor;
pub mod tolerances;
pub mod verify;

pub use scalar::{lit, Real};

/// Concrete f64 aliases used by the binary and the acceptance suite.
pub type Mesh64 = mesh::Mesh<f64>;
pub type DomainSpec64 = geometry::DomainSpec<f64>;
pub type MaterialModel64 = material::MaterialModel<f64>;
pub type ContactData64 = contact::ContactData<f64>;
pub type HistoryState64 = history::HistoryState<f64>;
pub type LoadSpec64 = assemble::LoadSpec<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type Sym264 = tensor::Sym2<f64>;
