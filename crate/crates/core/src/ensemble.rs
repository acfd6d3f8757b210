//! Per-shot analysis of realization records and ensemble summaries.

use crate::analysis::{kuiper_test, relative_angle_stats, Analyzer, ImageAnalysis, KuiperResult, RelativeAngleStats};
use crate::error::{Error, Result};
use crate::pattern::RealizationRecord;

/// Analysis of both spin components of one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotAnalysis {
    pub index: u64,
    pub plus: ImageAnalysis,
    pub minus: ImageAnalysis,
}

impl ShotAnalysis {
    /// Both clouds passed the estimator agreement filter.
    pub fn accepted(&self) -> bool {
        self.plus.accepted() && self.minus.accepted()
    }
}

pub fn analyze_record(analyzer: &Analyzer, record: &RealizationRecord) -> Result<ShotAnalysis> {
    Ok(ShotAnalysis {
        index: record.key.index,
        plus: analyzer.analyze(&record.image_plus)?,
        minus: analyzer.analyze(&record.image_minus)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub shots: usize,
    pub accepted: usize,
    /// Relative orientation (template angles) of the accepted shots.
    pub relative: Option<RelativeAngleStats>,
    /// Uniformity of the template angles of every shot, per spin state.
    pub uniformity_plus: KuiperResult,
    pub uniformity_minus: KuiperResult,
}

impl EnsembleSummary {
    pub fn acceptance_fraction(&self) -> f64 {
        self.accepted as f64 / self.shots as f64
    }
}

pub fn summarize(shots: &[ShotAnalysis], bin_width: f64) -> Result<EnsembleSummary> {
    let first = shots.first().ok_or(Error::EmptyInput)?;
    let period = first.plus.template.period;
    let pairs: Vec<_> = shots.iter().filter(|s| s.accepted()).map(|s| (s.plus.template, s.minus.template)).collect();
    let relative = if pairs.is_empty() { None } else { Some(relative_angle_stats(&pairs, bin_width)?) };
    let plus: Vec<f64> = shots.iter().map(|s| s.plus.template.angle).collect();
    let minus: Vec<f64> = shots.iter().map(|s| s.minus.template.angle).collect();
    Ok(EnsembleSummary {
        shots: shots.len(),
        accepted: pairs.len(),
        relative,
        uniformity_plus: kuiper_test(&plus, period)?,
        uniformity_minus: kuiper_test(&minus, period)?,
    })
}
