//! Percolation of device-to-device (D2D) networks whose devices live on
//! random street systems.
//!
//! Streets are modelled as Poisson-Voronoi (PVT) or Poisson-Delaunay (PDT)
//! tessellations realised on a square torus. Devices form a Cox process on
//! the street skeleton and are linked into a Gilbert graph of radius `r`.
//! On top of that the crate provides Monte Carlo estimators for the critical
//! device intensity, the percolation probability and the hop-count stretch
//! factor, together with the two closed-form threshold approximations.
//!
//! All lengths are kilometres; linear intensities are per km and planar
//! intensities per km².

pub mod cox;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod par;
pub mod tessellation;

pub use cox::{DeviceSet, LengthTable, StreetSampler};
pub use error::{Error, Result};
pub use geometry::{Point2, RngState, TorusWindow};
pub use graph::{GilbertGraph, Link, SpatialGrid, WrapState, WrapUnionFind};
pub use par::Execution;
pub use tessellation::{Segment, Tessellation, TessellationKind};
