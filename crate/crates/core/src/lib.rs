//! Turns a closed triangle mesh into a strip of identical thick square
//! panels and computes compact, self-intersection-free stacked states.
//!
//! The pipeline has three stages: surface voxelization ([`voxel`] and
//! [`panel`]), stripification of the panel dual graph into a single
//! Hamiltonian cycle ([`stripify`]), and stacking of the resulting strip
//! into piles ([`stack`]). Continuous fold kinematics with variable-length
//! hinges live in [`fold`], multi-model transformation planning in
//! [`transform`], and file formats plus mesh parsing in [`io`] and
//! [`plan`].

pub mod fold;
pub mod io;
pub mod mesh;
pub mod panel;
pub mod plan;
pub mod shapes;
pub mod stack;
pub mod stripify;
pub mod transform;
pub mod voxel;

pub use fold::{FoldConfiguration, SlabSet};
pub use mesh::TriangleMesh;
pub use panel::{Panel, PanelNetwork};
pub use stack::{CompactnessReport, StackPlan, StackedPlacement, Strip};
pub use stripify::{DualGraph, StripCycle};
pub use transform::{CommonStacking, HingeDiff};
pub use voxel::VoxelGrid;
