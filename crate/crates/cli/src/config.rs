//! Run configuration read from an INI file.
//!
//! Every section is optional and falls back to the 87Rb cylindrical-trap
//! defaults. Unknown sections and keys are errors.

use std::path::Path;

use spinbox::analysis::{default_basis, AnalysisConfig, DEFAULT_AGREEMENT_DEG, DEFAULT_BIN_DEG};
use spinbox::box_modes::gallery_modes;
use spinbox::error::{Error, Result};
use spinbox::ini::{parse_ini, IniReader};
use spinbox::pattern::{NoiseKind, NoiseSpec};
use spinbox::phys::{
    coupling_constants, hz_to_joule, q_from_field, thomas_fermi, CouplingConstants, PhysicalConstants, TrapConfig,
    ZeemanConversion, ATOMIC_MASS_UNIT, BOHR_RADIUS, HBAR, RB87_F2_SCATTERING_BOHR, RB87_MASS_AMU,
};
use spinbox::record_io::read_text;
use spinbox::{Grid2D, ModeIndex, SystemParams};

/// How the amplification of each shot is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplification {
    /// Squeeze parameter from the instability rate at each q over this time (s).
    Time(f64),
    /// The same squeeze parameter at every field.
    Fixed(f64),
}

/// One field setting of a simulate run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    /// Quadratic Zeeman energy (J).
    pub q: f64,
    pub b_gauss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    /// Modes of the spectrum scan and the mode gallery.
    pub modes: Vec<ModeIndex>,
    /// q grid of the spectrum scan (J).
    pub q_scan: Vec<f64>,
    pub fields: Vec<FieldPoint>,
    pub grid: Grid2D,
    pub seed: u64,
    pub realizations: u64,
    /// Realization directories written per field.
    pub store: u64,
    pub amplification: Amplification,
    pub mode: ModeIndex,
    pub noise: NoiseSpec,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn r_tf_um(&self) -> f64 {
        self.params.r_tf * 1e6
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        from_text("", "<defaults>").expect("defaults are valid")
    }
}

pub fn load(path: &Path) -> Result<RunConfig> {
    from_text(&read_text(path)?, &path.display().to_string())
}

/// Separator-tolerant mode list: `(1,0) (1,1)`, `1,0; 1,1` or `(1,0),(1,1)`.
fn parse_modes(text: &str) -> std::result::Result<Vec<ModeIndex>, String> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let items: Vec<String> = if t.contains('(') {
        t.split(')')
            .map(|s| s.trim_start_matches(|c: char| c == ',' || c == ';' || c.is_whitespace()))
            .filter(|s| !s.is_empty())
            .map(|s| format!("{s})"))
            .collect()
    } else {
        t.split(';').map(str::to_string).collect()
    };
    items
        .iter()
        .map(|s| s.parse::<ModeIndex>().map_err(|e| e.to_string()))
        .collect()
}

pub fn from_text(text: &str, path: &str) -> Result<RunConfig> {
    let doc = parse_ini(text, path)?;
    let r = IniReader::new(&doc);
    let bad = |section: &str, key: &str, msg: String| -> Error {
        match r.entry(section, key) {
            Some(e) => r.error(e, section, msg),
            None => Error::Parse { path: path.to_string(), line: 0, msg: format!("[{section}] {key}: {msg}") },
        }
    };
    let check = |ok: bool, section: &str, key: &str, msg: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(bad(section, key, msg.to_string()))
        }
    };

    // [physics]
    r.has_section("physics");
    let mass_amu: f64 = r.get("physics", "mass_amu")?.unwrap_or(RB87_MASS_AMU);
    check(mass_amu > 0.0, "physics", "mass_amu", "must be positive")?;
    let constants =
        PhysicalConstants::with_mass(mass_amu * ATOMIC_MASS_UNIT).map_err(|e| bad("physics", "mass_amu", e.to_string()))?;
    let lengths: Option<Vec<f64>> = r.list("physics", "scattering_bohr")?;
    let u0: Option<f64> = r.get("physics", "u0_jm3")?;
    let u1: Option<f64> = r.get("physics", "u1_jm3")?;
    let couplings = match (lengths, u0, u1) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(bad("physics", "scattering_bohr", "give either scattering_bohr or u0_jm3/u1_jm3".into()))
        }
        (_, Some(u0), Some(u1)) => CouplingConstants::new(u0, u1).map_err(|e| bad("physics", "u0_jm3", e.to_string()))?,
        (_, Some(_), None) => return Err(r.missing("physics", "u1_jm3")),
        (_, None, Some(_)) => return Err(r.missing("physics", "u0_jm3")),
        (lengths, None, None) => {
            let a = lengths.unwrap_or(RB87_F2_SCATTERING_BOHR.to_vec());
            check(a.len() == 3, "physics", "scattering_bohr", "expected three values a0, a2, a4")?;
            coupling_constants(a[0] * BOHR_RADIUS, a[1] * BOHR_RADIUS, a[2] * BOHR_RADIUS, constants.atom_mass)
                .map_err(|e| bad("physics", "scattering_bohr", e.to_string()))?
        }
    };
    let omega_hz: f64 = r.get("physics", "omega_hz")?.unwrap_or(30.0);
    check(omega_hz.is_finite(), "physics", "omega_hz", "must be finite")?;
    let atom_number: f64 = r.get("physics", "atom_number")?.unwrap_or(5.0e4);
    check(atom_number > 0.0, "physics", "atom_number", "must be positive")?;

    // [trap]
    r.has_section("trap");
    let trap = match r.list::<f64>("trap", "frequencies_hz")? {
        None => TrapConfig::cylindrical(),
        Some(f) => {
            check(f.len() == 3, "trap", "frequencies_hz", "expected three frequencies")?;
            TrapConfig::from_hz(f[0], f[1], f[2]).map_err(|e| bad("trap", "frequencies_hz", e.to_string()))?
        }
    };

    // [box]
    r.has_section("box");
    let derive: bool = r.get("box", "derive")?.unwrap_or(false);
    let r_tf_um: Option<f64> = r.get("box", "r_tf_um")?;
    let r_tf = match (derive, r_tf_um) {
        (true, Some(_)) => return Err(bad("box", "r_tf_um", "conflicts with derive = true".into())),
        (true, None) => {
            // scattering length of the m_F = 0 mean field, U0 = 4πħ²a/M
            let a = couplings.u0 * constants.atom_mass / (4.0 * std::f64::consts::PI * HBAR * HBAR);
            thomas_fermi(&constants, &trap, atom_number, a)
                .map_err(|e| bad("box", "derive", e.to_string()))?
                .r_tf_radial
        }
        (false, v) => {
            let v = v.unwrap_or(3.9);
            check(v > 0.0 && v.is_finite(), "box", "r_tf_um", "must be positive")?;
            v * 1e-6
        }
    };
    let modes = match r.entry("box", "modes") {
        None => gallery_modes(),
        Some(e) => parse_modes(&e.value).map_err(|m| r.error(e, "box", m))?,
    };
    if modes.is_empty() {
        return Err(bad("box", "modes", "mode list is empty".into()));
    }

    // [zeeman]
    r.has_section("zeeman");
    let coefficient: f64 = r.get("zeeman", "coefficient")?.unwrap_or(ZeemanConversion::default().coefficient);
    let sign: f64 = r.get("zeeman", "sign")?.unwrap_or(ZeemanConversion::default().sign);
    let conv = ZeemanConversion::new(coefficient, sign).map_err(|e| bad("zeeman", "coefficient", e.to_string()))?;
    let q_list: Option<Vec<f64>> = r.list("zeeman", "q_hz")?;
    let b_list: Option<Vec<f64>> = r.list("zeeman", "b_gauss")?;
    let fields = match (q_list, b_list) {
        (Some(_), Some(_)) => return Err(bad("zeeman", "b_gauss", "give either q_hz or b_gauss".into())),
        (Some(q), None) => q.iter().map(|&q| FieldPoint { q: hz_to_joule(q), b_gauss: None }).collect(),
        (None, Some(b)) => b
            .iter()
            .map(|&b| {
                q_from_field(b, &conv).map(|q| FieldPoint { q, b_gauss: Some(b) }).map_err(|e| bad("zeeman", "b_gauss", e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?,
        (None, None) => vec![FieldPoint { q: q_from_field(1.78, &conv)?, b_gauss: Some(1.78) }],
    };
    if fields.is_empty() {
        return Err(bad("zeeman", "q_hz", "field list is empty".into()));
    }
    let q_min: f64 = r.get("zeeman", "scan_min_hz")?.unwrap_or(-350.0);
    let q_max: f64 = r.get("zeeman", "scan_max_hz")?.unwrap_or(0.0);
    let steps: usize = r.get("zeeman", "scan_steps")?.unwrap_or(701);
    check(q_max >= q_min && q_min.is_finite() && q_max.is_finite(), "zeeman", "scan_max_hz", "need scan_min_hz <= scan_max_hz")?;
    check(steps >= 1, "zeeman", "scan_steps", "must be at least 1")?;
    let q_scan = (0..steps)
        .map(|i| {
            let f = if steps == 1 { q_min } else { q_min + (q_max - q_min) * i as f64 / (steps - 1) as f64 };
            hz_to_joule(f)
        })
        .collect();

    // [grid]
    r.has_section("grid");
    let half: f64 = r.get("grid", "half_extent_um")?.unwrap_or(1.1 * r_tf * 1e6);
    let samples: usize = r.get("grid", "samples")?.unwrap_or(128);
    let grid = Grid2D::new(half, samples).map_err(|e| bad("grid", "samples", e.to_string()))?;

    // [mc]
    r.has_section("mc");
    let seed: u64 = r.get("mc", "seed")?.unwrap_or(1);
    let realizations: u64 = r.get("mc", "realizations")?.unwrap_or(500);
    check(realizations >= 1, "mc", "realizations", "must be at least 1")?;
    let store: u64 = r.get("mc", "store")?.unwrap_or(realizations).min(realizations);
    let time_ms: Option<f64> = r.get("mc", "time_ms")?;
    let s: Option<f64> = r.get("mc", "s")?;
    let amplification = match (time_ms, s) {
        (Some(_), Some(_)) => return Err(bad("mc", "s", "give either time_ms or s".into())),
        (Some(t), None) => {
            check(t >= 0.0 && t.is_finite(), "mc", "time_ms", "must be non-negative")?;
            Amplification::Time(t * 1e-3)
        }
        (None, Some(s)) => {
            check(s >= 0.0 && s.is_finite(), "mc", "s", "must be non-negative")?;
            Amplification::Fixed(s)
        }
        (None, None) => Amplification::Time(17e-3),
    };
    let mode: ModeIndex = match r.entry("mc", "mode") {
        None => ModeIndex { n: 2, l: 1 },
        Some(e) => e.value.parse().map_err(|err: Error| r.error(e, "mc", err))?,
    };
    check(mode.l != 0, "mc", "mode", "needs |l| >= 1")?;
    let kind: NoiseKind = match r.entry("mc", "noise") {
        None => NoiseKind::Gaussian,
        Some(e) => e.value.parse().map_err(|err: Error| r.error(e, "mc", err))?,
    };
    let scale: f64 = r.get("mc", "noise_scale")?.unwrap_or(0.2);
    check(scale >= 0.0 && scale.is_finite(), "mc", "noise_scale", "must be non-negative")?;

    // [analysis]
    r.has_section("analysis");
    let threshold: f64 = r.get("analysis", "threshold_deg")?.unwrap_or(DEFAULT_AGREEMENT_DEG);
    check(threshold >= 0.0, "analysis", "threshold_deg", "must be non-negative")?;
    let bin: f64 = r.get("analysis", "bin_deg")?.unwrap_or(DEFAULT_BIN_DEG);
    let period_deg = 180.0 / mode.abs_l() as f64;
    check(bin > 0.0 && bin <= period_deg, "analysis", "bin_deg", "must lie in (0, 180/|l|]")?;
    let basis = match r.entry("analysis", "basis") {
        None => default_basis(),
        Some(e) => parse_modes(&e.value).map_err(|m| r.error(e, "analysis", m))?,
    };

    r.finish()?;
    let params = SystemParams {
        constants,
        trap,
        atom_number,
        couplings,
        omega_spin: hz_to_joule(omega_hz),
        q_zeeman: fields[0].q,
        r_tf,
    };
    params.validate()?;
    Ok(RunConfig {
        params,
        modes,
        q_scan,
        fields,
        grid,
        seed,
        realizations,
        store,
        amplification,
        mode,
        noise: NoiseSpec { kind, scale },
        analysis: AnalysisConfig { threshold: threshold.to_radians(), basis, bin_width: bin.to_radians() },
    })
}
