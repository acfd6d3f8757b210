//! On-disk layout of a realization record.
//!
//! A record directory holds `params.cfg` (INI), `plus.csv` and `minus.csv`
//! (wide image CSV), `truth.csv` (one row of ground truth) and, optionally,
//! `plus.pgm` / `minus.pgm`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::box_modes::ModeIndex;
use crate::error::{Error, Result};
use crate::image::{DensityImage, Grid2D};
use crate::ini::{parse_ini, IniReader};
use crate::pattern::{NoiseKind, NoiseSpec, RealizationRecord};
use crate::phase_stats::PairPhaseDraw;
use crate::rng::StreamKey;

pub const PARAMS_FILE: &str = "params.cfg";
pub const PLUS_FILE: &str = "plus.csv";
pub const MINUS_FILE: &str = "minus.csv";
pub const TRUTH_FILE: &str = "truth.csv";

pub const TRUTH_HEADER: &str =
    "truth_angle_plus_rad,truth_angle_minus_rad,phase_plus_l_up,phase_minus_l_down,phase_minus_l_up,phase_plus_l_down,pair_count";

pub fn params_text(rec: &RealizationRecord) -> String {
    let g = rec.image_plus.grid;
    let mut out = String::new();
    writeln!(out, "[realization]").unwrap();
    writeln!(out, "seed = {}", rec.key.seed).unwrap();
    writeln!(out, "index = {}", rec.key.index).unwrap();
    writeln!(out, "mode = {},{}", rec.mode.n, rec.mode.l).unwrap();
    writeln!(out, "s = {}", rec.s).unwrap();
    writeln!(out, "r_tf_um = {}", rec.r_tf_um).unwrap();
    writeln!(out, "noise = {}", rec.noise.kind).unwrap();
    writeln!(out, "noise_scale = {}", rec.noise.scale).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[grid]").unwrap();
    writeln!(out, "half_extent_um = {}", g.half_extent_um).unwrap();
    writeln!(out, "samples = {}", g.samples).unwrap();
    out
}

pub fn truth_text(rec: &RealizationRecord) -> String {
    let d = &rec.draw;
    format!(
        "{TRUTH_HEADER}\n{},{},{},{},{},{},{}\n",
        rec.truth_angle_plus, rec.truth_angle_minus, d.plus_l_up, d.minus_l_down, d.minus_l_up, d.plus_l_down, d.pair_count
    )
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes the record into `dir` (created if needed) and returns the files
/// written, in a fixed order.
pub fn write_record(dir: &Path, rec: &RealizationRecord, graymaps: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut files = vec![
        (dir.join(PARAMS_FILE), params_text(rec)),
        (dir.join(PLUS_FILE), rec.image_plus.to_csv()),
        (dir.join(MINUS_FILE), rec.image_minus.to_csv()),
        (dir.join(TRUTH_FILE), truth_text(rec)),
    ];
    if graymaps {
        files.push((dir.join("plus.pgm"), rec.image_plus.to_pgm()));
        files.push((dir.join("minus.pgm"), rec.image_minus.to_pgm()));
    }
    for (p, text) in &files {
        write_text(p, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[derive(Debug)]
struct Params {
    key: StreamKey,
    mode: ModeIndex,
    s: f64,
    r_tf_um: f64,
    noise: NoiseSpec,
    grid: Grid2D,
}

fn parse_params(text: &str, path: &str) -> Result<Params> {
    let doc = parse_ini(text, path)?;
    let r = IniReader::new(&doc);
    let sec = "realization";
    let mode: ModeIndex = r.require(sec, "mode")?;
    let kind: NoiseKind = r.require(sec, "noise")?;
    let p = Params {
        key: StreamKey::new(r.require(sec, "seed")?, r.require(sec, "index")?),
        mode,
        s: r.require(sec, "s")?,
        r_tf_um: r.require(sec, "r_tf_um")?,
        noise: NoiseSpec { kind, scale: r.require(sec, "noise_scale")? },
        grid: {
            let e = r.entry("grid", "half_extent_um").ok_or_else(|| r.missing("grid", "half_extent_um"))?;
            let h: f64 = r.require("grid", "half_extent_um")?;
            Grid2D::new(h, r.require("grid", "samples")?).map_err(|err| r.error(e, "grid", err))?
        },
    };
    r.finish()?;
    Ok(p)
}

fn parse_truth(text: &str, path: &str) -> Result<(f64, f64, PairPhaseDraw)> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_string(), line, msg };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRUTH_HEADER => {}
        Some(_) => return Err(err(1, "unexpected header".into())),
        None => return Err(err(1, "missing header row".into())),
    }
    let row = lines.next().ok_or_else(|| err(2, "missing data row".into()))?;
    let f: Vec<&str> = row.split(',').map(str::trim).collect();
    if f.len() != 7 {
        return Err(err(2, format!("expected 7 fields, found {}", f.len())));
    }
    let num = |i: usize| f[i].parse::<f64>().map_err(|e| err(2, format!("bad value {:?}: {e}", f[i])));
    let pair_count = f[6].parse::<u64>().map_err(|e| err(2, format!("bad pair count {:?}: {e}", f[6])))?;
    let draw = PairPhaseDraw {
        plus_l_up: num(2)?,
        minus_l_down: num(3)?,
        minus_l_up: num(4)?,
        plus_l_down: num(5)?,
        pair_count,
    };
    Ok((num(0)?, num(1)?, draw))
}

/// Reads a record directory written by [`write_record`].
pub fn read_record(dir: &Path) -> Result<RealizationRecord> {
    let pp = dir.join(PARAMS_FILE);
    let params = parse_params(&read_text(&pp)?, &pp.display().to_string())?;
    let image = |name: &str| -> Result<DensityImage> {
        let p = dir.join(name);
        DensityImage::from_csv(&read_text(&p)?, Some(params.grid), &p.display().to_string())
    };
    let tp = dir.join(TRUTH_FILE);
    let (truth_angle_plus, truth_angle_minus, draw) = parse_truth(&read_text(&tp)?, &tp.display().to_string())?;
    Ok(RealizationRecord {
        key: params.key,
        mode: params.mode,
        s: params.s,
        r_tf_um: params.r_tf_um,
        noise: params.noise,
        draw,
        image_plus: image(PLUS_FILE)?,
        image_minus: image(MINUS_FILE)?,
        truth_angle_plus,
        truth_angle_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Synthesizer;

    fn tmpdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("spinbox-record-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn round_trip_is_exact() {
        let syn = Synthesizer::new(ModeIndex { n: 2, l: 1 }, 3.9, Grid2D::new(4.29, 24).unwrap()).unwrap();
        let rec = syn.realization(2.3, StreamKey::new(11, 4), NoiseSpec::gaussian(0.2)).unwrap();
        let dir = tmpdir("rt");
        let files = write_record(&dir, &rec, true).unwrap();
        assert_eq!(files.len(), 6);
        assert_eq!(read_record(&dir).unwrap(), rec);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn truncated_image_names_file_and_line() {
        let syn = Synthesizer::new(ModeIndex { n: 2, l: 1 }, 3.9, Grid2D::new(4.29, 16).unwrap()).unwrap();
        let rec = syn.realization(1.0, StreamKey::new(1, 0), NoiseSpec::NONE).unwrap();
        let dir = tmpdir("trunc");
        write_record(&dir, &rec, false).unwrap();
        let p = dir.join(MINUS_FILE);
        let text = read_text(&p).unwrap();
        let cut: String = text.lines().take(9).map(|l| format!("{l}\n")).collect();
        write_text(&p, &cut).unwrap();
        let err = read_record(&dir).unwrap_err().to_string();
        assert!(err.contains("minus.csv:10"), "{err}");
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn missing_params_key_is_reported() {
        let err = parse_params("[realization]\nseed = 1\n", "p.cfg").unwrap_err().to_string();
        assert!(err.starts_with("p.cfg:1: missing key"), "{err}");
    }
}
