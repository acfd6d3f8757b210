//! Synthesis of single-shot and averaged m_F = ±1 density images.
//!
//! A populated vortex/antivortex pair (n, ±l) with equal amplitudes forms
//! the azimuthal standing wave
//!
//!   |φ_{n,l}|² (1 + (−1)^{|l|} cos(Δφ + 2|l|γ)),   Δφ = φ_{+l} − φ_{−l},
//!
//! whose lobes point along γ* = (π·[|l| odd] − Δφ)/(2|l|) mod π/|l|.
//! Images are normalized to one atom per unit population and scaled by the
//! sampled pair number.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::box_modes::{ModeIndex, ModeShape};
use crate::error::{invalid, Error, Result};
use crate::image::{DensityImage, Grid2D};
use crate::instability::squeeze_parameter;
use crate::phase_stats::{
    phase_sum_mean, sample_pair_count, sample_pair_phases, sample_phase_sum_deviation, wrap_phase,
    PairPhaseDraw,
};
use crate::phys::SystemParams;
use crate::rng::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    /// Additive, `scale` = standard deviation in atoms per pixel.
    Gaussian,
    /// Shot noise, `scale` = detected counts per atom.
    Poisson,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::None => "none",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Poisson => "poisson",
        })
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(NoiseKind::None),
            "gaussian" => Ok(NoiseKind::Gaussian),
            "poisson" => Ok(NoiseKind::Poisson),
            other => Err(invalid(format!("unknown noise kind {other:?}, expected none|gaussian|poisson"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub scale: f64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec { kind: NoiseKind::None, scale: 0.0 };

    pub fn gaussian(scale: f64) -> Self {
        Self { kind: NoiseKind::Gaussian, scale }
    }

    pub fn poisson(scale: f64) -> Self {
        Self { kind: NoiseKind::Poisson, scale }
    }
}

/// Lobe orientation of the (n, ±l) standing wave for Δφ, in [0, π/|l|).
pub fn pattern_orientation(abs_l: u32, delta_phi: f64) -> f64 {
    let l = abs_l as f64;
    let offset = if abs_l % 2 == 1 { PI } else { 0.0 };
    let period = PI / l;
    let a = ((offset - delta_phi) / (2.0 * l)).rem_euclid(period);
    if a >= period {
        0.0
    } else {
        a
    }
}

/// Relative phase Δφ = φ_{+l} − φ_{−l} that orients the lobes along `angle`.
pub fn delta_phi_for_orientation(abs_l: u32, angle: f64) -> f64 {
    let offset = if abs_l % 2 == 1 { PI } else { 0.0 };
    wrap_phase(offset - 2.0 * abs_l as f64 * angle)
}

/// Pixel tables for one (n, ±l) pair on one grid.
#[derive(Debug, Clone)]
pub struct VortexBasis {
    pub mode: ModeIndex,
    pub r_tf_um: f64,
    pub grid: Grid2D,
    /// |φ_{n,l}|² per pixel (μm⁻²).
    density: Vec<f64>,
    cos_2l: Vec<f64>,
    sin_2l: Vec<f64>,
}

impl VortexBasis {
    pub fn new(mode: ModeIndex, r_tf_um: f64, grid: Grid2D) -> Result<Self> {
        if mode.l == 0 {
            return Err(Error::InvalidMode { n: mode.n, l: 0, reason: "standing wave needs l != 0" });
        }
        if !(r_tf_um > 0.0) {
            return Err(invalid("box radius must be positive"));
        }
        let mode = ModeIndex { n: mode.n, l: mode.l.abs() };
        let shape = ModeShape::new(mode, r_tf_um);
        let two_l = 2.0 * mode.l as f64;
        let mut density = Vec::with_capacity(grid.len());
        let mut cos_2l = Vec::with_capacity(grid.len());
        let mut sin_2l = Vec::with_capacity(grid.len());
        for (x, y) in grid.centers() {
            density.push(shape.density(x.hypot(y)));
            let g = y.atan2(x);
            cos_2l.push((two_l * g).cos());
            sin_2l.push((two_l * g).sin());
        }
        Ok(Self { mode, r_tf_um, grid, density, cos_2l, sin_2l })
    }

    pub fn abs_l(&self) -> u32 {
        self.mode.l as u32
    }

    /// Azimuthally uniform single-mode density.
    pub fn mode_density(&self) -> &[f64] {
        &self.density
    }

    /// cos(2|l|γ) per pixel.
    pub fn cos_table(&self) -> &[f64] {
        &self.cos_2l
    }

    /// sin(2|l|γ) per pixel.
    pub fn sin_table(&self) -> &[f64] {
        &self.sin_2l
    }

    /// Normalized standing wave for Δφ.
    pub fn pattern(&self, delta_phi: f64) -> DensityImage {
        let sign = if self.abs_l() % 2 == 1 { -1.0 } else { 1.0 };
        let (c, s) = (delta_phi.cos(), delta_phi.sin());
        let values = self
            .density
            .iter()
            .zip(self.cos_2l.iter().zip(&self.sin_2l))
            .map(|(&d, (&c2, &s2))| d * (1.0 + sign * (c * c2 - s * s2)))
            .collect();
        DensityImage { grid: self.grid, values }
    }
}

/// A synthesized standing wave and its ground-truth lobe orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferencePattern {
    pub image: DensityImage,
    /// Radians in [0, π/|l|).
    pub orientation: f64,
}

/// |(e^{iφ₊}φ_{n,+|l|} + e^{iφ₋}φ_{n,−|l|})/√2|² on the grid.
pub fn interference_density(
    mode: ModeIndex,
    phase_plus_l: f64,
    phase_minus_l: f64,
    r_tf_um: f64,
    grid: Grid2D,
) -> Result<InterferencePattern> {
    let basis = VortexBasis::new(mode, r_tf_um, grid)?;
    let dphi = phase_plus_l - phase_minus_l;
    Ok(InterferencePattern {
        image: basis.pattern(dphi),
        orientation: pattern_orientation(basis.abs_l(), dphi),
    })
}

/// One Monte Carlo shot of the (n, ±l) resonance in both spin states.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub key: StreamKey,
    pub mode: ModeIndex,
    pub s: f64,
    pub r_tf_um: f64,
    pub noise: NoiseSpec,
    pub draw: PairPhaseDraw,
    pub image_plus: DensityImage,
    pub image_minus: DensityImage,
    pub truth_angle_plus: f64,
    pub truth_angle_minus: f64,
}

impl RealizationRecord {
    /// Populations of the modes (+l,+1), (−l,+1), (+l,−1), (−l,−1).
    /// Every pair puts one atom in each spin state.
    pub fn mode_populations(&self) -> [u64; 4] {
        let k = self.draw.pair_count;
        [k, k, k, k]
    }

    /// Total atoms in m_F = +1 and m_F = −1.
    pub fn spin_populations(&self) -> (u64, u64) {
        let p = self.mode_populations();
        (p[0].saturating_add(p[1]), p[2].saturating_add(p[3]))
    }

    /// Relative orientation of the two clouds in [−π/(2|l|), π/(2|l|)).
    pub fn truth_relative_angle(&self) -> f64 {
        let period = PI / self.mode.abs_l() as f64;
        circular_difference(self.truth_angle_plus, self.truth_angle_minus, period)
    }
}

/// a − b reduced to [−period/2, period/2).
pub fn circular_difference(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b + 0.5 * period).rem_euclid(period) - 0.5 * period;
    if d >= 0.5 * period {
        -0.5 * period
    } else {
        d
    }
}

/// Realization generator for one (n, ±l) pair on one grid.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    basis: VortexBasis,
}

impl Synthesizer {
    pub fn new(mode: ModeIndex, r_tf_um: f64, grid: Grid2D) -> Result<Self> {
        Ok(Self { basis: VortexBasis::new(mode, r_tf_um, grid)? })
    }

    pub fn basis(&self) -> &VortexBasis {
        &self.basis
    }

    pub fn realization(&self, s: f64, key: StreamKey, noise: NoiseSpec) -> Result<RealizationRecord> {
        let mut phases = key.stream(Purpose::Phases);
        let draw = sample_pair_phases(s, &mut phases)?;
        let scale = draw.pair_count as f64;
        let l = self.basis.abs_l();
        let (d_up, d_down) = (draw.difference_up(), draw.difference_down());
        let mut noise_rng = key.stream(Purpose::Noise);
        let image_plus = add_noise(&self.basis.pattern(d_up).scaled(scale), noise, &mut noise_rng)?;
        let image_minus = add_noise(&self.basis.pattern(d_down).scaled(scale), noise, &mut noise_rng)?;
        Ok(RealizationRecord {
            key,
            mode: self.basis.mode,
            s,
            r_tf_um: self.basis.r_tf_um,
            noise,
            draw,
            image_plus,
            image_minus,
            truth_angle_plus: pattern_orientation(l, d_up),
            truth_angle_minus: pattern_orientation(l, d_down),
        })
    }
}

/// Single realization with a freshly built synthesizer. `params.r_tf` is in
/// metres; the grid frame is in micrometres.
pub fn realization(
    params: &SystemParams,
    mode: ModeIndex,
    s: f64,
    key: StreamKey,
    noise: NoiseSpec,
    grid: Grid2D,
) -> Result<RealizationRecord> {
    if mode.l == 0 {
        return Err(Error::InvalidMode { n: mode.n, l: 0, reason: "realizations need |l| >= 1" });
    }
    Synthesizer::new(mode, params.r_tf * 1e6, grid)?.realization(s, key, noise)
}

/// Pixelwise mean of the m_F = +1 and m_F = −1 images.
pub fn ensemble_average(records: &[RealizationRecord]) -> Result<(DensityImage, DensityImage)> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    let grid = first.image_plus.grid;
    if records.iter().any(|r| r.image_plus.grid != grid || r.image_minus.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let plus: Vec<&DensityImage> = records.iter().map(|r| &r.image_plus).collect();
    let minus: Vec<&DensityImage> = records.iter().map(|r| &r.image_minus).collect();
    Ok((mean_image(&plus)?, mean_image(&minus)?))
}

/// Pixelwise mean with compensated summation.
pub fn mean_image(images: &[&DensityImage]) -> Result<DensityImage> {
    let grid = images.first().ok_or(Error::EmptyInput)?.grid;
    if images.iter().any(|i| i.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let n = images.len() as f64;
    let values = (0..grid.len())
        .map(|p| {
            let (mut sum, mut comp) = (0.0f64, 0.0f64);
            for img in images {
                let v = img.values[p];
                let t = sum + v;
                comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
                sum = t;
            }
            (sum + comp) / n
        })
        .collect();
    Ok(DensityImage { grid, values })
}

/// One populated mode in a coherent superposition. For l = 0 only
/// `phase_plus` is used; for l ≠ 0 the pair (n, ±|l|) enters with equal
/// amplitudes and phases `phase_plus` (for +|l|) and `phase_minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAmplitude {
    pub mode: ModeIndex,
    pub weight: f64,
    pub phase_plus: f64,
    pub phase_minus: f64,
}

/// |Σ √w_i ψ_i|² where ψ_i is the (normalized) amplitude of component i.
pub fn superposition_density(components: &[ModeAmplitude], r_tf_um: f64, grid: Grid2D) -> Result<DensityImage> {
    if components.iter().any(|c| !(c.weight >= 0.0)) {
        return Err(invalid("mode weights must be non-negative"));
    }
    if !(components.iter().map(|c| c.weight).sum::<f64>() > 0.0) {
        return Err(invalid("mode weights must not all vanish"));
    }
    let parts: Vec<(f64, ModeShape, Option<ModeShape>, &ModeAmplitude)> = components
        .iter()
        .filter(|c| c.weight > 0.0)
        .map(|c| {
            let up = ModeIndex { n: c.mode.n, l: c.mode.l.abs() };
            let down = (c.mode.l != 0).then(|| ModeShape::new(up.partner(), r_tf_um));
            (c.weight.sqrt(), ModeShape::new(up, r_tf_um), down, c)
        })
        .collect();
    Ok(DensityImage::from_fn(grid, |x, y| {
        let (r, g) = (x.hypot(y), y.atan2(x));
        let mut amp = Complex64::new(0.0, 0.0);
        for (w, up, down, c) in &parts {
            let a = match down {
                None => up.amplitude(r, g) * Complex64::from_polar(1.0, c.phase_plus),
                Some(dn) => {
                    (up.amplitude(r, g) * Complex64::from_polar(1.0, c.phase_plus)
                        + dn.amplitude(r, g) * Complex64::from_polar(1.0, c.phase_minus))
                        * FRAC_1_SQRT_2
                }
            };
            amp += a * *w;
        }
        amp.norm_sqr()
    }))
}

/// Two-component admixture, e.g. a (1,±1) standing wave with some (1,0).
pub fn admix_neighbor(a: ModeAmplitude, b: ModeAmplitude, r_tf_um: f64, grid: Grid2D) -> Result<DensityImage> {
    superposition_density(&[a, b], r_tf_um, grid)
}

/// Normalized difference plus/Σplus − minus/Σminus.
pub fn spin_pattern(plus: &DensityImage, minus: &DensityImage) -> Result<DensityImage> {
    if plus.grid != minus.grid {
        return Err(Error::GridMismatch);
    }
    let (sp, sm) = (plus.values.iter().sum::<f64>(), minus.values.iter().sum::<f64>());
    if sp == 0.0 || sm == 0.0 {
        return Err(Error::ZeroMass);
    }
    let values = plus.values.iter().zip(&minus.values).map(|(p, m)| p / sp - m / sm).collect();
    Ok(DensityImage { grid: plus.grid, values })
}

/// Adds independent per-pixel noise. Gaussian noise may leave negative
/// pixels; they are kept.
pub fn add_noise<R: Rng + ?Sized>(image: &DensityImage, noise: NoiseSpec, rng: &mut R) -> Result<DensityImage> {
    if !(noise.scale >= 0.0) || !noise.scale.is_finite() {
        return Err(invalid(format!("noise scale must be non-negative, got {}", noise.scale)));
    }
    let area = image.grid.pixel_area_um2();
    let values = match noise.kind {
        NoiseKind::None => return Ok(image.clone()),
        _ if noise.scale == 0.0 => return Ok(image.clone()),
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, noise.scale / area).map_err(|e| invalid(e.to_string()))?;
            image.values.iter().map(|v| v + normal.sample(rng)).collect()
        }
        NoiseKind::Poisson => image
            .values
            .iter()
            .map(|&v| {
                let lambda = v.max(0.0) * area * noise.scale;
                let counts = if lambda > 0.0 {
                    Poisson::new(lambda).map_err(|e| invalid(e.to_string()))?.sample(rng)
                } else {
                    0.0
                };
                Ok(counts / (area * noise.scale))
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    Ok(DensityImage { grid: image.grid, values })
}

/// Both spin components of one shot in which every mode of `modes` is
/// amplified at its own rate for quadratic Zeeman energy `q` (J) and time
/// `t` (s). Pairs (n,0) are single two-mode squeezers; pairs (n,±l) are the
/// twofold squeezer of [`Synthesizer::realization`]. Modes are coherently
/// superposed with independent phases.
#[allow(clippy::too_many_arguments)]
pub fn multimode_realization(
    params: &SystemParams,
    modes: &[ModeIndex],
    q: f64,
    t: f64,
    key: StreamKey,
    noise: NoiseSpec,
    r_tf_um: f64,
    grid: Grid2D,
) -> Result<(DensityImage, DensityImage)> {
    let mut up = Vec::new();
    let mut down = Vec::new();
    let mut seen = Vec::new();
    for (k, m) in modes.iter().enumerate() {
        let pair = (m.n, m.l.unsigned_abs());
        if seen.contains(&pair) {
            continue;
        }
        seen.push(pair);
        let eps = crate::box_modes::energy_2d(*m, params.r_tf, params.constants.atom_mass);
        let s = squeeze_parameter(eps, q, params.omega_spin, t);
        let mut rng = key.stream(Purpose::Other(k as u32));
        let base = ModeIndex { n: m.n, l: m.l.abs() };
        if m.l == 0 {
            let phi_up = rng.random_range(-PI..PI);
            let phi_down = phase_sum_mean() - phi_up + sample_phase_sum_deviation(s, &mut rng);
            let count = sample_pair_count(s, &mut rng) as f64;
            up.push(ModeAmplitude { mode: base, weight: count, phase_plus: phi_up, phase_minus: 0.0 });
            down.push(ModeAmplitude { mode: base, weight: count, phase_plus: phi_down, phase_minus: 0.0 });
        } else {
            let d = sample_pair_phases(s, &mut rng)?;
            let count = d.pair_count as f64;
            up.push(ModeAmplitude { mode: base, weight: count, phase_plus: d.plus_l_up, phase_minus: d.minus_l_up });
            down.push(ModeAmplitude {
                mode: base,
                weight: count,
                phase_plus: d.plus_l_down,
                phase_minus: d.minus_l_down,
            });
        }
    }
    let mut noise_rng = key.stream(Purpose::Noise);
    let build = |parts: &[ModeAmplitude]| -> Result<DensityImage> {
        if parts.iter().all(|p| p.weight == 0.0) {
            Ok(DensityImage::zeros(grid))
        } else {
            superposition_density(parts, r_tf_um, grid)
        }
    };
    let plus = add_noise(&build(&up)?, noise, &mut noise_rng)?;
    let minus = add_noise(&build(&down)?, noise, &mut noise_rng)?;
    Ok((plus, minus))
}
