//! Spin dynamics of a spin-2 condensate in an effective box potential.
//!
//! The crate covers the Bogoliubov instability spectrum of the cylindrical
//! box modes, two-mode squeezed pair statistics, synthesis of symmetry-broken
//! density patterns and the orientation / mode-weight analysis applied to
//! them.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bessel;
pub mod box_modes;
pub mod ensemble;
pub mod error;
pub mod image;
pub mod ini;
pub mod instability;
pub mod nnls;
pub mod pattern;
pub mod phase_stats;
pub mod phys;
pub mod record_io;
pub mod rng;

pub use box_modes::{ModeIndex, ModeShape};
pub use error::{Error, Result};
pub use image::{DensityImage, Grid2D};
pub use phys::SystemParams;
