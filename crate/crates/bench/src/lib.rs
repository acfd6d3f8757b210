//! Fixtures shared by the criterion benchmarks.

use spinbox::pattern::interference_density;
use spinbox::{DensityImage, Grid2D, ModeIndex};

pub const R_TF_UM: f64 = 3.9;

pub fn grid(samples: usize) -> Grid2D {
    Grid2D::new(1.1 * R_TF_UM, samples).expect("valid grid")
}

/// Noise-free (2,±1) interference pattern at relative phase `dphi`.
pub fn vortex_pattern(samples: usize, dphi: f64) -> DensityImage {
    let mode = ModeIndex { n: 2, l: 1 };
    interference_density(mode, dphi, 0.0, R_TF_UM, grid(samples)).expect("l != 0").image
}
