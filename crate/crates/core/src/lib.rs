//! Stability spectra and Dirichlet-to-Neumann maps of stationary geodesic networks on the unit sphere.

pub mod catalog;
pub mod cli;
pub mod dtn;
pub mod fem;
pub mod function;
pub mod io;
pub mod linalg;
pub mod network;
pub mod spectral;
pub mod sphere;
