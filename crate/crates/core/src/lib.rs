//! Rotational hypersurfaces whose mean curvature is a prescribed function of
//! the angle function (the vertical component of the unit normal).
//!
//! The library builds profile curves by integrating the tangent-angle ODE
//! system, analyzes the associated phase plane, classifies the resulting
//! surfaces against the known taxonomy (spheres, bowls, catenoids, unduloids,
//! nodoids, wing-like and disk-type surfaces), and exports portraits,
//! profiles, and meshes.

pub mod classify;
pub mod curvfn;
pub mod error;
pub mod geomio;
pub mod integrate;
pub mod oracles;
pub mod phase;
pub mod verify;

pub use curvfn::CurvatureProfile;
pub use error::{Error, Result};
pub use integrate::{IntegrationOptions, OrbitTrace, ProfileState};
