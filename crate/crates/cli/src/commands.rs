//! The four subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use spinbox::analysis::{circular_histogram, Analyzer, ImageAnalysis};
use spinbox::box_modes::{energy_2d, mode_density_grid, ModeShape};
use spinbox::ensemble::{analyze_record, summarize, ShotAnalysis};
use spinbox::error::{Error, Result};
use spinbox::instability::{resonance_positions, spectrum_scan, squeeze_parameter};
use spinbox::pattern::{circular_difference, RealizationRecord, Synthesizer};
use spinbox::phys::joule_to_hz;
use spinbox::record_io::{read_record, write_record, PARAMS_FILE};
use spinbox::rng::StreamKey;

use crate::config::{Amplification, RunConfig};
use crate::output::{ImageFormats, Outputs};

/// Instability rates over the q scan and the resonance positions.
pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let mut outputs = Outputs::new(out)?;
    let rows = spectrum_scan(&cfg.params, &cfg.modes, &cfg.q_scan)?;
    let mut csv = String::from("q_hz");
    for m in &cfg.modes {
        write!(csv, ",rate_{}_hz", m.label()).unwrap();
    }
    csv.push('\n');
    for row in &rows {
        write!(csv, "{}", row.q_over_h).unwrap();
        for r in &row.rates {
            write!(csv, ",{r}").unwrap();
        }
        csv.push('\n');
    }
    outputs.write("spectrum.csv", &csv)?;

    let mut res = String::from("mode,q_hz\n");
    for (m, q) in cfg.modes.iter().zip(resonance_positions(&cfg.params, &cfg.modes)) {
        let q = joule_to_hz(q);
        writeln!(res, "\"{m}\",{q}").unwrap();
        println!("resonance {m}: q/h = {q:.2} Hz");
    }
    outputs.write("resonances.csv", &res)?;
    outputs.finish()
}

/// Single-mode density grids and their energies.
pub fn modes(cfg: &RunConfig, out: &Path, formats: ImageFormats) -> Result<PathBuf> {
    let mut outputs = Outputs::new(out)?;
    let r_um = cfg.r_tf_um();
    let mut table = String::from("mode,beta,energy_hz\n");
    for &m in &cfg.modes {
        let shape = ModeShape::new(m, r_um);
        let e = joule_to_hz(energy_2d(m, cfg.params.r_tf, cfg.params.constants.atom_mass));
        writeln!(table, "\"{m}\",{},{e}", shape.beta).unwrap();
        let img = mode_density_grid(m, r_um, cfg.grid);
        if formats.csv {
            outputs.write(format!("modes/{}.csv", m.label()), &img.to_csv())?;
        }
        if formats.pgm {
            outputs.write(format!("modes/{}.pgm", m.label()), &img.to_pgm())?;
        }
    }
    outputs.write("modes.csv", &table)?;
    outputs.finish()
}

/// Per-image and per-shot tables of one group of shots.
pub struct GroupTables {
    pub analysis: String,
    pub relative: String,
    pub histogram: String,
    pub orientations: String,
    pub summary: String,
    pub circular_std_deg: Option<f64>,
    pub acceptance: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn image_row(out: &mut String, id: &str, a: &ImageAnalysis, truth: f64, basis_len: usize) {
    write!(
        out,
        "{id},{},{},{},{}",
        opt(a.quadrupole.map(|q| q.angle.to_degrees())),
        a.template.angle.to_degrees(),
        opt(a.agreement.map(|g| g.difference.to_degrees())),
        u8::from(a.accepted())
    )
    .unwrap();
    match &a.weights {
        Some(w) => w.weights.iter().for_each(|x| write!(out, ",{x}").unwrap()),
        None => (0..basis_len).for_each(|_| out.push(',')),
    }
    writeln!(out, ",{}", truth.to_degrees()).unwrap();
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// `shots[i]` pairs with `truth[i]` = (plus, minus) ground-truth angles.
pub fn group_tables(cfg: &RunConfig, shots: &[ShotAnalysis], truth: &[(f64, f64)]) -> Result<GroupTables> {
    let basis = &cfg.analysis.basis;
    let mut analysis = String::from("id,angle_quad_deg,angle_fit_deg,diff_deg,accepted");
    for m in basis {
        write!(analysis, ",w_{}", m.label()).unwrap();
    }
    analysis.push_str(",truth_deg\n");
    let mut relative = String::from("id,rel_deg,truth_rel_deg,accepted\n");
    let mut errors = Vec::new();
    for (s, &(tp, tm)) in shots.iter().zip(truth) {
        let id = format!("r{:05}", s.index);
        image_row(&mut analysis, &format!("{id}/plus"), &s.plus, tp, basis.len());
        image_row(&mut analysis, &format!("{id}/minus"), &s.minus, tm, basis.len());
        let period = s.plus.template.period;
        let rel = circular_difference(s.plus.template.angle, s.minus.template.angle, period);
        let trel = circular_difference(tp, tm, period);
        writeln!(relative, "{id},{},{},{}", rel.to_degrees(), trel.to_degrees(), u8::from(s.accepted())).unwrap();
        errors.push(circular_difference(s.plus.template.angle, tp, period).abs().to_degrees());
        errors.push(circular_difference(s.minus.template.angle, tm, period).abs().to_degrees());
    }
    let sum = summarize(shots, cfg.analysis.bin_width)?;
    let period = shots[0].plus.template.period;

    let mut histogram = String::from("bin_center_deg,count\n");
    let diffs = sum.relative.as_ref().map(|r| r.differences.clone()).unwrap_or_default();
    let h = circular_histogram(&diffs, -0.5 * period, period, cfg.analysis.bin_width)?;
    for (c, n) in h.centers.iter().zip(&h.counts) {
        writeln!(histogram, "{},{n}", c.to_degrees()).unwrap();
    }
    let plus: Vec<f64> = shots.iter().map(|s| s.plus.template.angle).collect();
    let minus: Vec<f64> = shots.iter().map(|s| s.minus.template.angle).collect();
    let hp = circular_histogram(&plus, 0.0, period, cfg.analysis.bin_width)?;
    let hm = circular_histogram(&minus, 0.0, period, cfg.analysis.bin_width)?;
    let mut orientations = String::from("bin_center_deg,count_plus,count_minus\n");
    for ((c, a), b) in hp.centers.iter().zip(&hp.counts).zip(&hm.counts) {
        writeln!(orientations, "{},{a},{b}", c.to_degrees()).unwrap();
    }

    let std_deg = sum.relative.as_ref().map(|r| r.circular_std.to_degrees());
    let mut summary =
        String::from("shots,accepted,acceptance,circular_std_deg,kuiper_p_plus,kuiper_p_minus,median_fit_error_deg\n");
    writeln!(
        summary,
        "{},{},{},{},{},{},{}",
        sum.shots,
        sum.accepted,
        sum.acceptance_fraction(),
        opt(std_deg),
        sum.uniformity_plus.p_value,
        sum.uniformity_minus.p_value,
        opt(median(errors))
    )
    .unwrap();
    Ok(GroupTables {
        analysis,
        relative,
        histogram,
        orientations,
        summary,
        circular_std_deg: std_deg,
        acceptance: sum.acceptance_fraction(),
    })
}

fn write_group(outputs: &mut Outputs, dir: &str, t: &GroupTables) -> Result<()> {
    let join = |name: &str| if dir.is_empty() { name.to_string() } else { format!("{dir}/{name}") };
    outputs.write(join("analysis.csv"), &t.analysis)?;
    outputs.write(join("relative.csv"), &t.relative)?;
    outputs.write(join("histogram.csv"), &t.histogram)?;
    outputs.write(join("orientations.csv"), &t.orientations)?;
    outputs.write(join("summary.csv"), &t.summary)?;
    Ok(())
}

/// Monte Carlo realizations per field, their analysis and the trend of the
/// relative-angle width with q.
pub fn simulate(cfg: &RunConfig, out: &Path, formats: ImageFormats) -> Result<PathBuf> {
    let mut outputs = Outputs::new(out)?;
    let r_um = cfg.r_tf_um();
    let syn = Synthesizer::new(cfg.mode, r_um, cfg.grid)?;
    let analyzer = Analyzer::new(cfg.mode, r_um, cfg.grid, cfg.analysis.clone())?;
    let eps = energy_2d(cfg.mode, cfg.params.r_tf, cfg.params.constants.atom_mass);
    let mut trend = String::from("field,q_hz,b_gauss,s,shots,accepted,acceptance,circular_std_deg\n");
    for (f, field) in cfg.fields.iter().enumerate() {
        let s = match cfg.amplification {
            Amplification::Time(t) => squeeze_parameter(eps, field.q, cfg.params.omega_spin, t),
            Amplification::Fixed(s) => s,
        };
        let dir = format!("field_{f:02}");
        let root = outputs.root().join(&dir);
        let results = (0..cfg.realizations)
            .into_par_iter()
            .map(|i| -> Result<(ShotAnalysis, (f64, f64), Vec<PathBuf>)> {
                let rec = syn.realization(s, StreamKey::new(cfg.seed, i), cfg.noise)?;
                let files = if i < cfg.store {
                    write_record(&root.join(format!("r{i:05}")), &rec, formats.pgm)?
                } else {
                    Vec::new()
                };
                let shot = analyze_record(&analyzer, &rec)?;
                Ok((shot, (rec.truth_angle_plus, rec.truth_angle_minus), files))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut shots = Vec::with_capacity(results.len());
        let mut truth = Vec::with_capacity(results.len());
        for (shot, t, files) in results {
            outputs.record(&files);
            shots.push(shot);
            truth.push(t);
        }
        let tables = group_tables(cfg, &shots, &truth)?;
        write_group(&mut outputs, &dir, &tables)?;
        writeln!(
            trend,
            "{f},{},{},{s},{},{},{},{}",
            joule_to_hz(field.q),
            opt(field.b_gauss),
            shots.len(),
            (tables.acceptance * shots.len() as f64).round(),
            tables.acceptance,
            opt(tables.circular_std_deg)
        )
        .unwrap();
        println!(
            "{dir}: q/h = {:.2} Hz, s = {s:.3}, acceptance {:.3}, relative-angle std {} deg",
            joule_to_hz(field.q),
            tables.acceptance,
            tables.circular_std_deg.map_or("n/a".to_string(), |v| format!("{v:.2}"))
        );
    }
    outputs.write("trend.csv", &trend)?;
    outputs.finish()
}

fn find_records(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let io = |e: std::io::Error| Error::Io { path: dir.display().to_string(), msg: e.to_string() };
    if dir.join(PARAMS_FILE).is_file() {
        found.push(dir.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(dir).map_err(io)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>().map_err(io)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_records(&p, found)?;
        }
    }
    Ok(())
}

/// Errors of an analyze run, one per offending file.
#[derive(Debug)]
pub struct AnalyzeFailure(pub Vec<Error>);

/// Re-analyzes stored realization directories below `input`. Records are
/// grouped by their parent directory; each group gets the same tables as a
/// simulate field.
pub fn analyze(cfg: &RunConfig, input: &Path, out: &Path) -> std::result::Result<PathBuf, AnalyzeFailure> {
    let one = |e: Error| AnalyzeFailure(vec![e]);
    let mut dirs = Vec::new();
    find_records(input, &mut dirs).map_err(one)?;
    if dirs.is_empty() {
        return Err(one(Error::Io { path: input.display().to_string(), msg: "no realization directories found".into() }));
    }
    let loaded: Vec<Result<RealizationRecord>> = dirs.par_iter().map(|d| read_record(d)).collect();
    let errors: Vec<Error> = loaded.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    if !errors.is_empty() {
        return Err(AnalyzeFailure(errors));
    }
    let mut groups: BTreeMap<PathBuf, Vec<RealizationRecord>> = BTreeMap::new();
    for (d, rec) in dirs.iter().zip(loaded) {
        let parent = d.parent().unwrap_or(input).strip_prefix(input).unwrap_or(Path::new("")).to_path_buf();
        groups.entry(parent).or_default().push(rec.expect("errors handled above"));
    }
    let mut outputs = Outputs::new(out).map_err(one)?;
    for (rel, mut recs) in groups {
        recs.sort_by_key(|r| r.key.index);
        let first = &recs[0];
        let mut group_cfg = cfg.clone();
        group_cfg.mode = first.mode;
        let analyzer = Analyzer::new(first.mode, first.r_tf_um, first.image_plus.grid, cfg.analysis.clone()).map_err(one)?;
        if recs.iter().any(|r| r.mode != first.mode || r.r_tf_um != first.r_tf_um || r.image_plus.grid != first.image_plus.grid) {
            return Err(one(Error::GridMismatch));
        }
        let shots = recs.par_iter().map(|r| analyze_record(&analyzer, r)).collect::<Result<Vec<_>>>().map_err(one)?;
        let truth: Vec<(f64, f64)> = recs.iter().map(|r| (r.truth_angle_plus, r.truth_angle_minus)).collect();
        let tables = group_tables(&group_cfg, &shots, &truth).map_err(one)?;
        let name: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
        write_group(&mut outputs, &name.join("/"), &tables).map_err(one)?;
        println!(
            "{}: {} shots, acceptance {:.3}",
            if name.is_empty() { ".".to_string() } else { name.join("/") },
            shots.len(),
            tables.acceptance
        );
    }
    outputs.finish().map_err(one)
}
