//! Procedural generation and verification of topology-labeled 3D samples.
//!
//! Genus-g seed frames are placed inside random obstacle environments,
//! grown by repulsive-energy gradient flow, rasterized into voxel volumes
//! and point clouds, and certified by independent Betti-number computation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod mesh;
pub mod raster;
pub mod topo;
pub mod env;
pub mod growth;
pub mod pipeline;
