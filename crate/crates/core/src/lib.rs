//! Few-body Coulomb continuum states and the observables built on them.

pub mod amplitudes;
pub mod greenfn;
pub mod nbody;
pub mod scan;
pub mod specfun;
pub mod thermo;
pub mod threebody;
pub mod twobody;

/// Cartesian 3-vector in atomic units.
pub type Vec3 = nalgebra::Vector3<f64>;
