//! Eigenmodes of the one-dimensional box and the cylindrical box.
//!
//! The mode functions are homogeneous in length: pass the box radius and
//! positions in any common unit L and the amplitude comes back in L^{-1/2}
//! (1D) or L^{-1} (2D). Outside the box every amplitude is exactly zero.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::bessel::{bessel_j, bessel_j_signed, bessel_zero};
use crate::error::{Error, Result};
use crate::image::{DensityImage, Grid2D};

/// Radial (or longitudinal) quantum number `n ≥ 1` and angular momentum `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub n: u32,
    pub l: i32,
}

impl ModeIndex {
    pub fn new(n: u32, l: i32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMode { n, l, reason: "n starts at 1" });
        }
        Ok(Self { n, l })
    }

    pub fn abs_l(&self) -> u32 {
        self.l.unsigned_abs()
    }

    /// The counter-rotating partner (n, −l).
    pub fn partner(&self) -> Self {
        Self { n: self.n, l: -self.l }
    }

    /// Column label used in tables, e.g. `n2_l1`.
    pub fn label(&self) -> String {
        format!("n{}_l{}", self.n, self.l)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.l)
    }
}

impl std::str::FromStr for ModeIndex {
    type Err = Error;

    /// Parses `n,l` or `(n,l)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = t.split(',').map(str::trim);
        let bad = || Error::InvalidParameter(format!("cannot parse mode {s:?}, expected n,l"));
        let n = parts.next().and_then(|p| p.parse::<u32>().ok()).ok_or_else(bad)?;
        let l = parts.next().and_then(|p| p.parse::<i32>().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        ModeIndex::new(n, l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEnergy {
    pub mode: ModeIndex,
    /// Joules.
    pub energy: f64,
}

/// 1D box eigenfunction (1/√R)·sin(k_n x + nπ/2), k_n = nπ/(2R).
pub fn mode_1d(n: u32, r_tf: f64, x: f64) -> f64 {
    if x.abs() > r_tf {
        return 0.0;
    }
    let k = n as f64 * PI / (2.0 * r_tf);
    (k * x + n as f64 * FRAC_PI_2).sin() / r_tf.sqrt()
}

/// 1D box eigenenergy ħ²k_n²/(2M) in joules; `r_tf` in metres.
pub fn energy_1d(n: u32, r_tf: f64, mass: f64) -> f64 {
    let k = n as f64 * PI / (2.0 * r_tf);
    crate::phys::HBAR.powi(2) * k * k / (2.0 * mass)
}

/// Precomputed zero and normalization of one cylindrical mode.
#[derive(Debug, Clone, Copy)]
pub struct ModeShape {
    pub mode: ModeIndex,
    pub r_tf: f64,
    /// β_{n,|l|}.
    pub beta: f64,
    norm: f64,
}

impl ModeShape {
    pub fn new(mode: ModeIndex, r_tf: f64) -> Self {
        let beta = bessel_zero(mode.n, mode.abs_l());
        let norm = 1.0 / (PI.sqrt() * r_tf * bessel_j(mode.abs_l() + 1, beta));
        Self { mode, r_tf, beta, norm }
    }

    /// Real radial factor: J_l(β r/R)/(√π R J_{|l|+1}(β)), using the signed
    /// order so that J_{−l} = (−1)^l J_l.
    pub fn radial(&self, r: f64) -> f64 {
        if r > self.r_tf {
            return 0.0;
        }
        self.norm * bessel_j_signed(self.mode.l, self.beta * r / self.r_tf)
    }

    pub fn amplitude(&self, r: f64, gamma: f64) -> Complex64 {
        let rad = self.radial(r);
        if rad == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(rad, self.mode.l as f64 * gamma)
    }

    /// |φ|², independent of the azimuth.
    pub fn density(&self, r: f64) -> f64 {
        self.radial(r).powi(2)
    }
}

/// Cylindrical box eigenfunction φ_{n,l}(r, γ).
pub fn mode_2d(mode: ModeIndex, r_tf: f64, r: f64, gamma: f64) -> Complex64 {
    ModeShape::new(mode, r_tf).amplitude(r, gamma)
}

/// Cylindrical box eigenenergy ħ²β²_{n,|l|}/(2MR²) in joules.
pub fn energy_2d(mode: ModeIndex, r_tf: f64, mass: f64) -> f64 {
    let beta = bessel_zero(mode.n, mode.abs_l());
    crate::phys::HBAR.powi(2) * beta * beta / (2.0 * mass * r_tf * r_tf)
}

pub fn mode_energy(mode: ModeIndex, r_tf: f64, mass: f64) -> ModeEnergy {
    ModeEnergy { mode, energy: energy_2d(mode, r_tf, mass) }
}

/// Single-mode density |φ_{n,l}|² on the grid (atoms/μm² per atom);
/// `r_tf_um` in micrometres.
pub fn mode_density_grid(mode: ModeIndex, r_tf_um: f64, grid: Grid2D) -> DensityImage {
    let shape = ModeShape::new(mode, r_tf_um);
    DensityImage::from_fn(grid, |x, y| shape.density(x.hypot(y)))
}

/// The modes shown in the cylindrical-box mode gallery.
pub fn gallery_modes() -> Vec<ModeIndex> {
    [(1, 0), (1, 1), (2, 0), (2, 1), (3, 0)]
        .into_iter()
        .map(|(n, l)| ModeIndex { n, l })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phys::{joule_to_hz, PhysicalConstants};
    use approx::assert_relative_eq;

    fn m(n: u32, l: i32) -> ModeIndex {
        ModeIndex::new(n, l).unwrap()
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
        let h = (b - a) / steps as f64;
        let mut s = 0.5 * (f(a) + f(b));
        for i in 1..steps {
            s += f(a + i as f64 * h);
        }
        s * h
    }

    /// Polar quadrature of ∫∫ f(r,γ) r dr dγ over the unit-radius disk.
    fn polar(f: impl Fn(f64, f64) -> Complex64) -> Complex64 {
        let (nr, ng) = (4000, 64);
        let hr = 1.0 / nr as f64;
        let hg = 2.0 * PI / ng as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..=nr {
            let r = i as f64 * hr;
            let w = if i == 0 || i == nr { 0.5 } else { 1.0 };
            for k in 0..ng {
                s += f(r, k as f64 * hg) * (w * r);
            }
        }
        s * hr * hg
    }

    #[test]
    fn rejects_zero_n() {
        assert!(ModeIndex::new(0, 1).is_err());
        assert_eq!("(2,-1)".parse::<ModeIndex>().unwrap(), m(2, -1));
        assert_eq!(" 3, 0 ".parse::<ModeIndex>().unwrap(), m(3, 0));
        assert!("2".parse::<ModeIndex>().is_err());
    }

    #[test]
    fn mode_1d_shape() {
        let r = 2.0;
        assert_relative_eq!(mode_1d(1, r, 0.0), 1.0 / r.sqrt(), max_relative = 1e-15);
        assert!(mode_1d(2, r, 0.0).abs() < 1e-15);
        assert_eq!(mode_1d(1, r, 2.5), 0.0);
        for n in 1..6 {
            assert!(mode_1d(n, r, r).abs() < 1e-14);
            assert!(mode_1d(n, r, -r).abs() < 1e-14);
            let norm = trapezoid(|x| mode_1d(n, r, x).powi(2), -r, r, 20000);
            assert!((norm - 1.0).abs() < 1e-8, "n={n}: {norm}");
        }
    }

    #[test]
    fn mode_1d_counts_maxima() {
        let r = 1.0;
        for n in 1..7 {
            let pts = 4001;
            let d: Vec<f64> = (0..pts)
                .map(|i| mode_1d(n, r, -r + 2.0 * r * i as f64 / (pts - 1) as f64).powi(2))
                .collect();
            let maxima = (1..pts - 1).filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1]).count();
            assert_eq!(maxima, n as usize);
        }
    }

    #[test]
    fn energy_1d_scaling() {
        let mass = PhysicalConstants::rb87().atom_mass;
        let e1 = energy_1d(1, 3.9e-6, mass);
        assert!((joule_to_hz(e1) - 9.43).abs() < 0.01, "{}", joule_to_hz(e1));
        assert_relative_eq!(energy_1d(3, 3.9e-6, mass), 9.0 * e1, max_relative = 1e-14);
        assert_relative_eq!(energy_1d(1, 1.95e-6, mass), 4.0 * e1, max_relative = 1e-14);
    }

    #[test]
    fn mode_2d_normalized_and_orthogonal() {
        for (n, l) in [(1, 0), (2, 0), (1, 1), (2, -1), (3, 2)] {
            let md = m(n, l);
            let shape = ModeShape::new(md, 1.0);
            let norm = polar(|r, g| Complex64::new(shape.amplitude(r, g).norm_sqr(), 0.0));
            assert!((norm.re - 1.0).abs() < 1e-6, "{md}: {norm}");
        }
        let pairs = [((1, 0), (2, 0)), ((1, 1), (2, 1)), ((2, 0), (3, 0)), ((1, 1), (1, -1))];
        for ((n1, l1), (n2, l2)) in pairs {
            let (a, b) = (m(n1, l1), m(n2, l2));
            let (sa, sb) = (ModeShape::new(a, 1.0), ModeShape::new(b, 1.0));
            let ip = polar(|r, g| sa.amplitude(r, g).conj() * sb.amplitude(r, g));
            assert!(ip.norm() < 1e-6, "<{a},{b}> = {ip}");
        }
    }

    #[test]
    fn vortex_core_and_walls() {
        assert_eq!(mode_2d(m(2, 1), 1.0, 0.0, 0.3).norm(), 0.0);
        assert_eq!(mode_2d(m(1, 0), 1.0, 1.2, 0.0).norm(), 0.0);
        assert!(mode_2d(m(1, 0), 1.0, 1.0, 0.0).norm() < 1e-12);
    }

    #[test]
    fn cylindrical_energies() {
        let mass = PhysicalConstants::rb87().atom_mass;
        let want = [(1, 0, 22.1), (1, 1, 56.1), (2, 0, 116.5), (2, 1, 188.1), (3, 0, 286.2)];
        let mut last = 0.0;
        for (n, l, hz) in want {
            let e = joule_to_hz(energy_2d(m(n, l), 3.9e-6, mass));
            assert!((e - hz).abs() < 0.15, "({n},{l}) {e}");
            assert!(e > last);
            last = e;
            assert_eq!(energy_2d(m(n, l), 3.9e-6, mass), energy_2d(m(n, -l), 3.9e-6, mass));
        }
    }

    #[test]
    fn density_grid_shapes() {
        let grid = Grid2D::new(4.2, 128).unwrap();
        let r = 3.9;
        for md in gallery_modes() {
            let img = mode_density_grid(md, r, grid);
            assert!((img.total_mass() - 1.0).abs() < 0.02, "{md}: {}", img.total_mass());
            // radial maxima along +x through the centre row pair
            let shape = ModeShape::new(md, r);
            let profile: Vec<f64> = (0..2000).map(|i| shape.density(r * i as f64 / 1999.0)).collect();
            let mut maxima = (1..profile.len() - 1)
                .filter(|&i| profile[i] > profile[i - 1] && profile[i] >= profile[i + 1])
                .count();
            if md.l == 0 {
                maxima += 1; // the central maximum sits on the boundary of the scan
            }
            assert_eq!(maxima, md.n as usize, "{md}");
        }
        let vortex = mode_density_grid(m(2, 1), r, grid);
        let c = grid.samples / 2;
        let centre = vortex.get(c, c);
        let peak = vortex.values.iter().cloned().fold(0.0, f64::max);
        assert!(centre < 0.01 * peak);
        let ground = mode_density_grid(m(1, 0), r, grid);
        let gpeak = ground.values.iter().cloned().fold(0.0, f64::max);
        assert!(ground.get(c, c) > 0.99 * gpeak);
    }
}
