//! Orientation estimators, agreement filter, mode-weight decomposition and
//! circular statistics for density images.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::box_modes::{ModeIndex, ModeShape};
use crate::error::{Error, Result};
use crate::image::{DensityImage, Grid2D};
use crate::nnls::{dot, nnls_normal};
use crate::pattern::{circular_difference, pattern_orientation};

/// Density-weighted second moments about the centre of mass, in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleTensor {
    pub qxx: f64,
    pub qxy: f64,
    pub qyy: f64,
}

impl QuadrupoleTensor {
    /// Eigenvalues, larger first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.qxx + self.qyy);
        let r = (0.5 * (self.qxx - self.qyy)).hypot(self.qxy);
        (mean + r, mean - r)
    }
}

/// Whether a pixel lies in the disk inscribed in the grid. The estimators
/// ignore the corners so that noise there cannot favour the diagonals.
pub fn in_aperture(grid: &Grid2D, row: usize, col: usize) -> bool {
    let (x, y) = grid.center_um(row, col);
    x * x + y * y <= grid.half_extent_um * grid.half_extent_um
}

fn aperture_mask(grid: &Grid2D) -> Vec<bool> {
    let n = grid.samples;
    (0..n * n).map(|p| in_aperture(grid, p / n, p % n)).collect()
}

/// Centre of mass in pixel coordinates (column, row) over the aperture,
/// negatives clamped.
pub fn center_of_mass_px(image: &DensityImage) -> Result<(f64, f64)> {
    let n = image.grid.samples;
    let mask = aperture_mask(&image.grid);
    let (mut m, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for row in 0..n {
        for col in 0..n {
            if !mask[row * n + col] {
                continue;
            }
            let v = image.values[row * n + col].max(0.0);
            m += v;
            cx += v * col as f64;
            cy += v * row as f64;
        }
    }
    if !(m > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok((cx / m, cy / m))
}

/// Q_ij = Σ n (3 r_i r_j − δ_ij |r|²), r from the centre of mass, summed
/// over the aperture. Negative pixels count as zero.
pub fn quadrupole_tensor(image: &DensityImage) -> Result<QuadrupoleTensor> {
    let (xc, yc) = center_of_mass_px(image)?;
    let n = image.grid.samples;
    let mask = aperture_mask(&image.grid);
    let (mut qxx, mut qxy, mut qyy) = (0.0, 0.0, 0.0);
    for row in 0..n {
        let y = row as f64 - yc;
        for col in 0..n {
            if !mask[row * n + col] {
                continue;
            }
            let v = image.values[row * n + col].max(0.0);
            let x = col as f64 - xc;
            let r2 = x * x + y * y;
            qxx += v * (3.0 * x * x - r2);
            qxy += v * 3.0 * x * y;
            qyy += v * (3.0 * y * y - r2);
        }
    }
    Ok(QuadrupoleTensor { qxx, qxy, qyy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMethod {
    Quadrupole,
    Template,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    /// Radians in [0, period).
    pub angle: f64,
    pub period: f64,
    pub method: AngleMethod,
    /// Relative eigenvalue gap (quadrupole) or unexplained variance fraction
    /// (template).
    pub quality: f64,
    pub low_confidence: bool,
}

pub const EIGEN_GAP_THRESHOLD: f64 = 1e-9;

fn reduce(angle: f64, period: f64) -> f64 {
    let a = angle.rem_euclid(period);
    if a >= period {
        0.0
    } else {
        a
    }
}

/// Orientation of the eigenvector with the larger eigenvalue.
pub fn principal_angle(tensor: &QuadrupoleTensor, period: f64) -> Result<AngleEstimate> {
    let (l1, l2) = tensor.eigenvalues();
    let scale = l1.abs() + l2.abs();
    let gap = if scale > 0.0 { (l1 - l2) / scale } else { 0.0 };
    if !(gap > EIGEN_GAP_THRESHOLD) {
        return Err(Error::IndeterminateOrientation { gap });
    }
    let theta = 0.5 * (2.0 * tensor.qxy).atan2(tensor.qxx - tensor.qyy);
    Ok(AngleEstimate {
        angle: reduce(theta, period),
        period,
        method: AngleMethod::Quadrupole,
        quality: gap,
        low_confidence: false,
    })
}

/// Unexplained-variance fraction above which a template fit is flagged.
pub const FIT_RESIDUAL_THRESHOLD: f64 = 0.5;

const PHASE_GRID: usize = 72;

/// Least-squares fit of a·P(Δφ) + b over the aperture, with P the (n, ±l)
/// standing wave centred at the image's centre of mass. Returns the
/// orientation implied by the best Δφ; fits with a ≤ 0 are flagged.
pub fn template_fit_angle(image: &DensityImage, mode: ModeIndex, r_tf_um: f64, grid: Grid2D) -> Result<AngleEstimate> {
    if mode.l == 0 {
        return Err(Error::InvalidMode { n: mode.n, l: 0, reason: "template fit needs |l| >= 1" });
    }
    if image.grid != grid {
        return Err(Error::GridMismatch);
    }
    let abs_l = mode.l.unsigned_abs();
    let (xc_px, yc_px) = center_of_mass_px(image)?;
    let d = grid.pixel_size_um();
    let (xc, yc) = (grid.coord_um(0) + xc_px * d, grid.coord_um(0) + yc_px * d);
    let shape = ModeShape::new(ModeIndex { n: mode.n, l: abs_l as i32 }, r_tf_um);
    let two_l = 2.0 * abs_l as f64;

    // Basis D, D·cos2lγ, D·sin2lγ, 1 and its Gram sums against each other and y.
    let mut g = [[0.0f64; 4]; 4];
    let mut gy = [0.0f64; 4];
    let mut yy = 0.0;
    let mut npx = 0.0;
    let mask = aperture_mask(&grid);
    for (((x, y), &v), _) in grid.centers().zip(&image.values).zip(&mask).filter(|(_, &m)| m) {
        npx += 1.0;
        let (dx, dy) = (x - xc, y - yc);
        let dens = shape.density(dx.hypot(dy));
        let gam = dy.atan2(dx);
        let b = [dens, dens * (two_l * gam).cos(), dens * (two_l * gam).sin(), 1.0];
        for i in 0..4 {
            gy[i] += b[i] * v;
            for j in i..4 {
                g[i][j] += b[i] * b[j];
            }
        }
        yy += v * v;
    }
    for (i, j) in [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)] {
        g[i][j] = g[j][i];
    }
    let sst = yy - gy[3] * gy[3] / npx;
    if !(sst > 0.0) {
        return Err(Error::DegenerateFit);
    }
    let sign = if abs_l % 2 == 1 { -1.0 } else { 1.0 };

    // Amplitude, offset and residual sum of squares for a given Δφ.
    let solve = |dphi: f64| -> (f64, f64, f64) {
        let c = [1.0, sign * dphi.cos(), -sign * dphi.sin()];
        let mut tt = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                tt += c[i] * c[j] * g[i][j];
            }
        }
        let t1: f64 = (0..3).map(|i| c[i] * g[i][3]).sum();
        let ty: f64 = (0..3).map(|i| c[i] * gy[i]).sum();
        let y1 = gy[3];
        let det = tt * npx - t1 * t1;
        let (a, b) = if det.abs() > 1e-300 {
            ((ty * npx - t1 * y1) / det, (tt * y1 - t1 * ty) / det)
        } else {
            (0.0, y1 / npx)
        };
        (a, b, yy - 2.0 * (a * ty + b * y1) + a * a * tt + 2.0 * a * b * t1 + b * b * npx)
    };
    let ssr = |dphi: f64| solve(dphi).2;

    let step = 2.0 * PI / PHASE_GRID as f64;
    let best = (0..PHASE_GRID)
        .map(|k| k as f64 * step)
        .min_by(|a, b| ssr(*a).total_cmp(&ssr(*b)))
        .unwrap_or(0.0);
    let dphi = golden_section(&ssr, best - step, best + step, 1e-10);
    let (a, _, res) = solve(dphi);
    let rel = (res / sst).max(0.0);
    Ok(AngleEstimate {
        angle: pattern_orientation(abs_l, dphi),
        period: PI / abs_l as f64,
        method: AngleMethod::Template,
        quality: rel,
        low_confidence: rel > FIT_RESIDUAL_THRESHOLD || a <= 0.0,
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub const DEFAULT_AGREEMENT_DEG: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub accepted: bool,
    /// a − b on [−period/2, period/2).
    pub difference: f64,
}

pub fn agreement_filter(a: &AngleEstimate, b: &AngleEstimate, threshold: f64) -> Result<Agreement> {
    if (a.period - b.period).abs() > 1e-12 * a.period.abs().max(b.period.abs()) {
        return Err(Error::DomainMismatch(a.period, b.period));
    }
    let difference = circular_difference(a.angle, b.angle, a.period);
    Ok(Agreement { accepted: difference.abs() <= threshold + 1e-12, difference })
}

/// Nonnegative mode weights, normalized to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub modes: Vec<ModeIndex>,
    pub weights: Vec<f64>,
    /// ‖Aw − y‖² / ‖y‖² of the unnormalized fit, with y the image scaled to
    /// unit mass.
    pub residual: f64,
    /// Gradient of ½‖Aw − y‖² at the unnormalized fit.
    pub gradient: Vec<f64>,
}

impl WeightVector {
    pub fn dominant(&self) -> ModeIndex {
        let i = (0..self.weights.len()).max_by(|&a, &b| self.weights[a].total_cmp(&self.weights[b])).unwrap_or(0);
        self.modes[i]
    }

    pub fn weight_of(&self, mode: ModeIndex) -> Option<f64> {
        let key = (mode.n, mode.l.unsigned_abs());
        self.modes.iter().position(|m| (m.n, m.l.unsigned_abs()) == key).map(|i| self.weights[i])
    }
}

/// Modes n = 1..3, |l| = 0, 1.
pub fn default_basis() -> Vec<ModeIndex> {
    (1..=3).flat_map(|n| [ModeIndex { n, l: 0 }, ModeIndex { n, l: 1 }]).collect()
}

/// Single-mode density templates centred on the grid origin, unit mass.
pub fn mode_templates(basis: &[ModeIndex], r_tf_um: f64, grid: Grid2D) -> Vec<Vec<f64>> {
    let area = grid.pixel_area_um2();
    basis
        .iter()
        .map(|m| {
            let shape = ModeShape::new(ModeIndex { n: m.n, l: m.l.abs() }, r_tf_um);
            let v: Vec<f64> = grid.centers().map(|(x, y)| shape.density(x.hypot(y))).collect();
            let mass: f64 = v.iter().sum::<f64>() * area;
            v.into_iter().map(|x| x / mass).collect()
        })
        .collect()
}

/// Precomputed templates and Gram matrix for repeated weight fits.
#[derive(Debug, Clone)]
pub struct WeightFitter {
    basis: Vec<ModeIndex>,
    grid: Grid2D,
    columns: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
}

impl WeightFitter {
    pub fn new(basis: &[ModeIndex], r_tf_um: f64, grid: Grid2D) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyInput);
        }
        let columns = mode_templates(basis, r_tf_um, grid);
        let m = columns.len();
        let gram = DMatrix::from_fn(m, m, |r, c| dot(&columns[r], &columns[c]));
        Ok(Self { basis: basis.to_vec(), grid, columns, gram })
    }

    pub fn fit(&self, image: &DensityImage) -> Result<WeightVector> {
        if image.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let mass = image.total_mass();
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        let y: Vec<f64> = image.values.iter().map(|v| v / mass).collect();
        let h = DVector::from_fn(self.columns.len(), |r, _| dot(&self.columns[r], &y));
        let sol = nnls_normal(&self.gram, &h)?;
        let total: f64 = sol.weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateFit);
        }
        let yy = dot(&y, &y);
        let w = DVector::from_column_slice(&sol.weights);
        let ssr = (w.dot(&(&self.gram * &w)) - 2.0 * w.dot(&h) + yy).max(0.0);
        Ok(WeightVector {
            modes: self.basis.clone(),
            weights: sol.weights.iter().map(|x| x / total).collect(),
            residual: ssr / yy,
            gradient: sol.gradient,
        })
    }
}

/// NNLS decomposition of the image into azimuthally uniform single-mode
/// densities. Templates sit on the grid origin.
pub fn mode_weight_fit(image: &DensityImage, basis: &[ModeIndex], r_tf_um: f64, grid: Grid2D) -> Result<WeightVector> {
    if image.grid != grid {
        return Err(Error::GridMismatch);
    }
    WeightFitter::new(basis, r_tf_um, grid)?.fit(image)
}

/// Circular standard deviation √(−2 ln R̄) of values with the given period,
/// expressed in the same units.
pub fn circular_std(values: &[f64], period: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = 2.0 * PI / period;
    let (s, c) = values.iter().fold((0.0, 0.0), |(s, c), v| (s + (k * v).sin(), c + (k * v).cos()));
    let rbar = (s.hypot(c) / values.len() as f64).min(1.0);
    Ok((-2.0 * rbar.ln()).max(0.0).sqrt() / k)
}

pub const DEFAULT_BIN_DEG: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Histogram on [lo, lo + period) with bins as close to `bin_width` as tile
/// the period exactly.
pub fn circular_histogram(values: &[f64], lo: f64, period: f64, bin_width: f64) -> Result<Histogram> {
    if !(bin_width > 0.0) || bin_width > period {
        return Err(crate::error::invalid("bin width must lie in (0, period]"));
    }
    let bins = (period / bin_width).round().max(1.0) as usize;
    let w = period / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in values {
        let b = (((v - lo).rem_euclid(period)) / w) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let centers = (0..bins).map(|i| lo + (i as f64 + 0.5) * w).collect();
    Ok(Histogram { bin_width: w, centers, counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeAngleStats {
    /// First minus second, on [−period/2, period/2).
    pub differences: Vec<f64>,
    pub histogram: Histogram,
    pub circular_std: f64,
}

pub fn relative_angle_stats(pairs: &[(AngleEstimate, AngleEstimate)], bin_width: f64) -> Result<RelativeAngleStats> {
    let first = pairs.first().ok_or(Error::EmptyInput)?;
    let period = first.0.period;
    let differences = pairs
        .iter()
        .map(|(a, b)| agreement_filter(a, b, f64::INFINITY).map(|g| g.difference))
        .collect::<Result<Vec<f64>>>()?;
    if let Some((a, _)) = pairs.iter().find(|(a, _)| (a.period - period).abs() > 1e-12 * period) {
        return Err(Error::DomainMismatch(period, a.period));
    }
    let histogram = circular_histogram(&differences, -0.5 * period, period, bin_width)?;
    let circular_std = circular_std(&differences, period)?;
    Ok(RelativeAngleStats { differences, histogram, circular_std })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KuiperResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kuiper test of uniformity on the circle of the given period.
pub fn kuiper_test(angles: &[f64], period: f64) -> Result<KuiperResult> {
    if angles.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut u: Vec<f64> = angles.iter().map(|a| a.rem_euclid(period) / period).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let (mut dplus, mut dminus) = (0.0f64, 0.0f64);
    for (i, &x) in u.iter().enumerate() {
        dplus = dplus.max((i as f64 + 1.0) / n - x);
        dminus = dminus.max(x - i as f64 / n);
    }
    let v = dplus + dminus;
    let sn = n.sqrt();
    Ok(KuiperResult { statistic: v, p_value: kuiper_tail((sn + 0.155 + 0.24 / sn) * v) })
}

/// Asymptotic tail 2Σ (4j²λ² − 1) exp(−2j²λ²).
pub fn kuiper_tail(lambda: f64) -> f64 {
    if lambda < 0.4 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j2l2 = (j * j) as f64 * lambda * lambda;
        let term = (4.0 * j2l2 - 1.0) * (-2.0 * j2l2).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Analysis settings shared by the batch pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Radians.
    pub threshold: f64,
    pub basis: Vec<ModeIndex>,
    /// Radians.
    pub bin_width: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_AGREEMENT_DEG.to_radians(),
            basis: default_basis(),
            bin_width: DEFAULT_BIN_DEG.to_radians(),
        }
    }
}

/// Both estimators, their agreement and the mode weights for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageAnalysis {
    pub quadrupole: Option<AngleEstimate>,
    pub template: AngleEstimate,
    pub agreement: Option<Agreement>,
    pub weights: Option<WeightVector>,
}

impl ImageAnalysis {
    /// Both estimators produced an angle and they agree within threshold.
    pub fn accepted(&self) -> bool {
        self.agreement.is_some_and(|a| a.accepted)
    }
}

/// Per-image analysis for a fixed mode, box and grid.
#[derive(Debug, Clone)]
pub struct Analyzer {
    pub mode: ModeIndex,
    pub r_tf_um: f64,
    pub grid: Grid2D,
    pub config: AnalysisConfig,
    weights: Option<WeightFitter>,
}

impl Analyzer {
    pub fn new(mode: ModeIndex, r_tf_um: f64, grid: Grid2D, config: AnalysisConfig) -> Result<Self> {
        if mode.l == 0 {
            return Err(Error::InvalidMode { n: mode.n, l: 0, reason: "orientation analysis needs |l| >= 1" });
        }
        let weights = if config.basis.is_empty() {
            None
        } else {
            Some(WeightFitter::new(&config.basis, r_tf_um, grid)?)
        };
        Ok(Self { mode, r_tf_um, grid, config, weights })
    }

    pub fn analyze(&self, image: &DensityImage) -> Result<ImageAnalysis> {
        let template = match template_fit_angle(image, self.mode, self.r_tf_um, self.grid) {
            Ok(t) => t,
            // no signal at all: report a flagged placeholder
            Err(Error::ZeroMass) | Err(Error::DegenerateFit) => AngleEstimate {
                angle: 0.0,
                period: PI / self.mode.l.unsigned_abs() as f64,
                method: AngleMethod::Template,
                quality: 1.0,
                low_confidence: true,
            },
            Err(e) => return Err(e),
        };
        let quadrupole = match quadrupole_tensor(image).and_then(|q| principal_angle(&q, template.period)) {
            Ok(a) => Some(a),
            Err(Error::IndeterminateOrientation { .. }) | Err(Error::ZeroMass) => None,
            Err(e) => return Err(e),
        };
        let agreement = match quadrupole {
            Some(q) if !(template.low_confidence && template.quality >= 1.0) => {
                Some(agreement_filter(&q, &template, self.config.threshold)?)
            }
            _ => None,
        };
        let weights = match &self.weights {
            None => None,
            Some(f) => match f.fit(image) {
                Ok(w) => Some(w),
                Err(Error::ZeroMass) | Err(Error::DegenerateFit) => None,
                Err(e) => return Err(e),
            },
        };
        Ok(ImageAnalysis { quadrupole, template, agreement, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::box_modes::mode_density_grid;
    use crate::pattern::{delta_phi_for_orientation, interference_density, superposition_density, ModeAmplitude};
    use proptest::prelude::*;

    const R: f64 = 3.9;

    fn grid() -> Grid2D {
        Grid2D::new(4.3, 96).unwrap()
    }

    fn m(n: u32, l: i32) -> ModeIndex {
        ModeIndex { n, l }
    }

    fn at_angle(mode: ModeIndex, angle: f64, g: Grid2D) -> DensityImage {
        let d = delta_phi_for_orientation(mode.l.unsigned_abs(), angle);
        interference_density(mode, d, 0.0, R, g).unwrap().image
    }

    /// Rotation by +90° about the grid centre.
    fn rotate_quarter(img: &DensityImage) -> DensityImage {
        let n = img.grid.samples;
        let mut v = vec![0.0; n * n];
        for row in 0..n {
            for col in 0..n {
                // (x, y) -> (−y, x)
                v[col * n + (n - 1 - row)] = img.values[row * n + col];
            }
        }
        DensityImage { grid: img.grid, values: v }
    }

    fn deg(a: f64) -> f64 {
        a.to_degrees()
    }

    #[test]
    fn symmetric_image_has_isotropic_quadrupole() {
        let img = mode_density_grid(m(2, 0), R, grid());
        let q = quadrupole_tensor(&img).unwrap();
        let s = q.qxx.abs();
        assert!((q.qxx - q.qyy).abs() < 1e-9 * s && q.qxy.abs() < 1e-9 * s);
        assert!(matches!(principal_angle(&q, PI), Err(Error::IndeterminateOrientation { .. })));
        assert_eq!(quadrupole_tensor(&DensityImage::zeros(grid())), Err(Error::ZeroMass));
    }

    #[test]
    fn quarter_rotation_transforms_tensor() {
        let img = at_angle(m(2, 1), 0.3, grid());
        let q = quadrupole_tensor(&img).unwrap();
        let r = quadrupole_tensor(&rotate_quarter(&img)).unwrap();
        let s = q.qxx.abs() + q.qyy.abs();
        assert!((r.qxx - q.qyy).abs() < 1e-9 * s);
        assert!((r.qyy - q.qxx).abs() < 1e-9 * s);
        assert!((r.qxy + q.qxy).abs() < 1e-9 * s);
    }

    #[test]
    fn principal_angle_examples() {
        let a = principal_angle(&QuadrupoleTensor { qxx: 2.0, qxy: 0.0, qyy: 1.0 }, PI).unwrap();
        assert_eq!(a.angle, 0.0);
        let b = principal_angle(&QuadrupoleTensor { qxx: 1.0, qxy: 0.5, qyy: 1.0 }, PI).unwrap();
        assert!((b.angle - PI / 4.0).abs() < 1e-15);
        let c = principal_angle(&QuadrupoleTensor { qxx: 1.0, qxy: -0.5, qyy: 1.0 }, PI).unwrap();
        assert!((c.angle - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!(principal_angle(&QuadrupoleTensor { qxx: 1.0, qxy: 0.0, qyy: 1.0 }, PI).is_err());
    }

    #[test]
    fn agreement_examples() {
        let e = |deg: f64| AngleEstimate {
            angle: deg.to_radians(),
            period: PI,
            method: AngleMethod::Quadrupole,
            quality: 1.0,
            low_confidence: false,
        };
        let t = DEFAULT_AGREEMENT_DEG.to_radians();
        let same = agreement_filter(&e(33.0), &e(33.0), t).unwrap();
        assert!(same.accepted && same.difference == 0.0);
        let wrap = agreement_filter(&e(1.0), &e(179.0), t).unwrap();
        assert!(wrap.accepted && (deg(wrap.difference) - 2.0).abs() < 1e-9);
        assert!(!agreement_filter(&e(50.0), &e(9.0), t).unwrap().accepted);
        assert!(agreement_filter(&e(49.0), &e(9.0), t).unwrap().accepted);
        let other = AngleEstimate { period: PI / 2.0, ..e(10.0) };
        assert!(matches!(agreement_filter(&e(10.0), &other, t), Err(Error::DomainMismatch(..))));
    }

    #[test]
    fn estimators_recover_known_angles() {
        for i in 0..12 {
            let truth = (i as f64 * 0.2718).rem_euclid(PI);
            let img = at_angle(m(2, 1), truth, grid());
            let q = principal_angle(&quadrupole_tensor(&img).unwrap(), PI).unwrap();
            let t = template_fit_angle(&img, m(2, 1), R, grid()).unwrap();
            assert!(deg(circular_difference(q.angle, truth, PI)).abs() < 1.0, "quad {i}");
            assert!(deg(circular_difference(t.angle, truth, PI)).abs() < 0.5, "fit {i}");
            assert!(!t.low_confidence && t.quality < 1e-6);
        }
        for mode in [m(1, 1), m(3, 2)] {
            let p = PI / mode.l as f64;
            let truth = 0.37 * p;
            let t = template_fit_angle(&at_angle(mode, truth, grid()), mode, R, grid()).unwrap();
            assert!(deg(circular_difference(t.angle, truth, p)).abs() < 0.5);
        }
    }

    #[test]
    fn template_flags_round_input() {
        for n in 1..=3 {
            let img = mode_density_grid(m(n, 0), R, grid());
            let t = template_fit_angle(&img, m(2, 1), R, grid()).unwrap();
            assert!(t.low_confidence, "({n},0) quality {}", t.quality);
        }
        assert!(template_fit_angle(&mode_density_grid(m(2, 0), R, grid()), m(2, 0), R, grid()).is_err());
    }

    #[test]
    fn template_tolerates_offset_and_negatives() {
        let truth = 1.1;
        let img = at_angle(m(2, 1), truth, grid());
        let shifted = DensityImage { grid: img.grid, values: img.values.iter().map(|v| 3.0 * v - 0.01).collect() };
        let t = template_fit_angle(&shifted, m(2, 1), R, grid()).unwrap();
        assert!(deg(circular_difference(t.angle, truth, PI)).abs() < 0.5);
    }

    #[test]
    fn weight_fit_self_and_mixture() {
        let basis = default_basis();
        let w = mode_weight_fit(&mode_density_grid(m(2, 0), R, grid()), &basis, R, grid()).unwrap();
        assert!((w.weight_of(m(2, 0)).unwrap() - 1.0).abs() < 1e-6);
        let mix = superposition_density(
            &[
                ModeAmplitude { mode: m(1, 0), weight: 0.6, phase_plus: 0.4, phase_minus: 0.0 },
                ModeAmplitude { mode: m(1, 1), weight: 0.4, phase_plus: -1.0, phase_minus: 2.0 },
            ],
            R,
            grid(),
        )
        .unwrap();
        let w = mode_weight_fit(&mix, &basis, R, grid()).unwrap();
        assert!((w.weight_of(m(1, 0)).unwrap() - 0.6).abs() < 0.05, "{w:?}");
        assert!((w.weight_of(m(1, 1)).unwrap() - 0.4).abs() < 0.05, "{w:?}");
        for (x, g) in w.weights.iter().zip(&w.gradient) {
            assert!(*x >= 0.0);
            if *x == 0.0 {
                assert!(*g >= -1e-8);
            }
        }
        assert_eq!(mode_weight_fit(&mix, &[], R, grid()), Err(Error::EmptyInput));
        assert_eq!(mode_weight_fit(&DensityImage::zeros(grid()), &basis, R, grid()), Err(Error::ZeroMass));
    }

    #[test]
    fn adding_generating_mode_does_not_raise_residual() {
        let img = mode_density_grid(m(3, 1), R, grid());
        let without = [m(1, 0), m(2, 0)];
        let a = mode_weight_fit(&img, &without, R, grid()).unwrap();
        let b = mode_weight_fit(&img, &[m(1, 0), m(2, 0), m(3, 1)], R, grid()).unwrap();
        assert!(b.residual <= a.residual);
        assert!(b.residual < 1e-12);
    }

    #[test]
    fn circular_stats() {
        let e = |a: f64| AngleEstimate { angle: a, period: PI, method: AngleMethod::Template, quality: 0.0, low_confidence: false };
        let pairs = vec![(e(0.5), e(0.5)); 20];
        let s = relative_angle_stats(&pairs, DEFAULT_BIN_DEG.to_radians()).unwrap();
        assert_eq!(s.circular_std, 0.0);
        assert_eq!(s.histogram.counts.len(), 18);
        assert_eq!(s.histogram.counts[9], 20);
        assert!(relative_angle_stats(&[], 0.1).is_err());
        // small spread: circular std tends to the linear std
        let vals: Vec<f64> = (0..1000).map(|i| 0.01 * ((i as f64 * 0.731).sin())).collect();
        let lin = (vals.iter().map(|v| v * v).sum::<f64>() / 1000.0).sqrt();
        let mean = vals.iter().sum::<f64>() / 1000.0;
        let lin = (lin * lin - mean * mean).sqrt();
        assert!((circular_std(&vals, PI).unwrap() / lin - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kuiper_tail_matches_tabulated_critical_values() {
        // asymptotic critical points of √n·V
        for (lam, alpha) in [(1.620, 0.10), (1.747, 0.05), (2.001, 0.01)] {
            assert!((kuiper_tail(lam) - alpha).abs() < 0.1 * alpha, "{lam}");
        }
    }

    #[test]
    fn kuiper_detects_concentration() {
        let uniform: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0 * PI).collect();
        assert!(kuiper_test(&uniform, PI).unwrap().p_value > 0.99);
        let lumpy: Vec<f64> = (0..500).map(|i| 0.3 * (i as f64 / 500.0)).collect();
        assert!(kuiper_test(&lumpy, PI).unwrap().p_value < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn estimators_are_rotation_equivariant(alpha in 0.0f64..PI, delta in -1.0f64..1.0) {
            let g = Grid2D::new(4.3, 64).unwrap();
            let a = at_angle(m(2, 1), alpha, g);
            let b = at_angle(m(2, 1), alpha + delta, g);
            let qa = principal_angle(&quadrupole_tensor(&a).unwrap(), PI).unwrap();
            let qb = principal_angle(&quadrupole_tensor(&b).unwrap(), PI).unwrap();
            prop_assert!(deg(circular_difference(qb.angle - qa.angle, delta, PI)).abs() < 1.0);
            let ta = template_fit_angle(&a, m(2, 1), R, g).unwrap();
            let tb = template_fit_angle(&b, m(2, 1), R, g).unwrap();
            prop_assert!(deg(circular_difference(tb.angle - ta.angle, delta, PI)).abs() < 0.5);
        }
    }
}
