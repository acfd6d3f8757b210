//! Physical constants, parameter records and the Thomas-Fermi background
//! that sets the size of the effective box.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Atomic mass unit (kg), CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Bohr radius (m), CODATA 2018.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Mass of 87Rb in atomic mass units.
pub const RB87_MASS_AMU: f64 = 86.909_180_531;

/// Converts an energy in joules to a frequency in hertz (E/h).
pub fn joule_to_hz(e: f64) -> f64 {
    e / PLANCK
}

/// Converts a frequency in hertz to an energy in joules (h f).
pub fn hz_to_joule(f: f64) -> f64 {
    f * PLANCK
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub atom_mass: f64,
    pub bohr_radius: f64,
}

impl PhysicalConstants {
    pub fn rb87() -> Self {
        Self {
            hbar: HBAR,
            atom_mass: RB87_MASS_AMU * ATOMIC_MASS_UNIT,
            bohr_radius: BOHR_RADIUS,
        }
    }

    pub fn with_mass(atom_mass: f64) -> Result<Self> {
        if !(atom_mass > 0.0) || !atom_mass.is_finite() {
            return Err(invalid(format!("atom mass must be positive, got {atom_mass}")));
        }
        Ok(Self { atom_mass, ..Self::rb87() })
    }
}

/// Harmonic trap angular frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
}

impl TrapConfig {
    pub fn new(omega_x: f64, omega_y: f64, omega_z: f64) -> Result<Self> {
        for (name, w) in [("omega_x", omega_x), ("omega_y", omega_y), ("omega_z", omega_z)] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {w}")));
            }
        }
        Ok(Self { omega_x, omega_y, omega_z })
    }

    /// Builds a trap from ordinary frequencies in Hz.
    pub fn from_hz(fx: f64, fy: f64, fz: f64) -> Result<Self> {
        Self::new(2.0 * PI * fx, 2.0 * PI * fy, 2.0 * PI * fz)
    }

    /// Trap of the cylindrical configuration: 2π·(187, 67, 183) Hz.
    pub fn cylindrical() -> Self {
        Self::from_hz(187.0, 67.0, 183.0).expect("positive frequencies")
    }

    pub fn geometric_mean(&self) -> f64 {
        (self.omega_x * self.omega_y * self.omega_z).cbrt()
    }

    /// Arithmetic mean of the two strongest frequencies, i.e. the radial
    /// frequency of the cylindrical box plane.
    pub fn radial_mean(&self) -> f64 {
        let mut w = [self.omega_x, self.omega_y, self.omega_z];
        w.sort_by(|a, b| b.total_cmp(a));
        0.5 * (w[0] + w[1])
    }
}

/// Spin-independent (`u0`) and spin-dependent (`u1`) contact couplings (J m³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstants {
    pub u0: f64,
    pub u1: f64,
}

impl CouplingConstants {
    pub fn new(u0: f64, u1: f64) -> Result<Self> {
        if !(u0 > 0.0) || !u0.is_finite() || !u1.is_finite() {
            return Err(invalid(format!("need u0 > 0 and finite u1, got u0={u0}, u1={u1}")));
        }
        Ok(Self { u0, u1 })
    }
}

/// Literature scattering lengths for the F = 2 manifold of 87Rb, in Bohr radii.
/// These are defaults only; every run may override them.
pub const RB87_F2_SCATTERING_BOHR: [f64; 3] = [87.7, 95.0, 99.0];

/// Contact couplings of a spin-2 gas from the three channel scattering
/// lengths a0, a2, a4 (m).
///
/// Each channel strength is g_F = 4πħ²a_F/M.
pub fn coupling_constants(a0: f64, a2: f64, a4: f64, mass: f64) -> Result<CouplingConstants> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(invalid(format!("mass must be positive, got {mass}")));
    }
    if ![a0, a2, a4].iter().all(|a| a.is_finite()) {
        return Err(invalid("scattering lengths must be finite"));
    }
    let g = |a: f64| 4.0 * PI * HBAR * HBAR * a / mass;
    let (g0, g2, g4) = (g(a0), g(a2), g(a4));
    let u0 = (7.0 * g0 + 10.0 * g2 + 18.0 * g4) / 35.0;
    let u1 = (-7.0 * g0 - 5.0 * g2 + 12.0 * g4) / 35.0;
    CouplingConstants::new(u0, u1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub constants: PhysicalConstants,
    pub trap: TrapConfig,
    pub atom_number: f64,
    pub couplings: CouplingConstants,
    /// Spin-changing coupling Ω (J).
    pub omega_spin: f64,
    /// Quadratic Zeeman energy q (J), entering as ε + q.
    pub q_zeeman: f64,
    /// Radius of the effective box (m).
    pub r_tf: f64,
}

impl SystemParams {
    /// 87Rb in the cylindrical trap with a 3.9 μm box and Ω = h·30 Hz.
    pub fn rb87_cylindrical() -> Self {
        let constants = PhysicalConstants::rb87();
        let [a0, a2, a4] = RB87_F2_SCATTERING_BOHR.map(|a| a * BOHR_RADIUS);
        Self {
            constants,
            trap: TrapConfig::cylindrical(),
            atom_number: 5.0e4,
            couplings: coupling_constants(a0, a2, a4, constants.atom_mass).expect("valid defaults"),
            omega_spin: hz_to_joule(30.0),
            q_zeeman: 0.0,
            r_tf: 3.9e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.atom_number > 0.0) {
            return Err(invalid("atom_number must be positive"));
        }
        if !(self.r_tf > 0.0) || !self.r_tf.is_finite() {
            return Err(invalid("r_tf must be positive"));
        }
        if !(self.constants.atom_mass > 0.0) {
            return Err(invalid("atom mass must be positive"));
        }
        if !self.omega_spin.is_finite() || !self.q_zeeman.is_finite() {
            return Err(invalid("omega_spin and q_zeeman must be finite"));
        }
        Ok(())
    }

    /// Chemical potential consistent with the box radius, so that the
    /// radial harmonic potential equals μ exactly at r_tf.
    pub fn box_chemical_potential(&self) -> f64 {
        let w = self.trap.radial_mean();
        0.5 * self.constants.atom_mass * w * w * self.r_tf * self.r_tf
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThomasFermi {
    /// Chemical potential (J).
    pub mu: f64,
    /// Radius along the strong radial axes (m).
    pub r_tf_radial: f64,
}

/// Three-dimensional Thomas-Fermi chemical potential and radial size.
pub fn thomas_fermi(
    constants: &PhysicalConstants,
    trap: &TrapConfig,
    atom_number: f64,
    scattering_length: f64,
) -> Result<ThomasFermi> {
    if !(atom_number > 0.0) || !(scattering_length > 0.0) {
        return Err(invalid("atom number and scattering length must be positive"));
    }
    let m = constants.atom_mass;
    let w_bar = trap.geometric_mean();
    let a_ho = (constants.hbar / (m * w_bar)).sqrt();
    let mu = 0.5 * constants.hbar * w_bar * (15.0 * atom_number * scattering_length / a_ho).powf(0.4);
    let w_r = trap.radial_mean();
    let r_tf_radial = (2.0 * mu / (m * w_r * w_r)).sqrt();
    Ok(ThomasFermi { mu, r_tf_radial })
}

/// Effective potential seen by the m_F = ±1 atoms along a radial axis:
/// V(x) + (U0 + U1) n0(x) − μ with the Thomas-Fermi density n0.
pub fn effective_potential_profile(params: &SystemParams, axis_points: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    let m = params.constants.atom_mass;
    let w = params.trap.radial_mean();
    let mu = params.box_chemical_potential();
    let CouplingConstants { u0, u1 } = params.couplings;
    let limit = 2.0 * params.r_tf;
    axis_points
        .iter()
        .map(|&x| {
            if !(x.abs() <= limit) {
                return Err(invalid(format!("point {x} m outside ±2 r_tf")));
            }
            let v = 0.5 * m * w * w * x * x;
            if v < mu {
                // (U0+U1)(μ−V)/U0 + V − μ, rearranged to avoid cancellation
                Ok(u1 / u0 * (mu - v))
            } else {
                Ok(v - mu)
            }
        })
        .collect()
}

/// Field-to-energy conversion q/h = sign · coefficient · B².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanConversion {
    /// Hz per G².
    pub coefficient: f64,
    /// +1 or −1.
    pub sign: f64,
}

impl ZeemanConversion {
    pub fn new(coefficient: f64, sign: f64) -> Result<Self> {
        if !(coefficient > 0.0) || !coefficient.is_finite() {
            return Err(invalid(format!("Zeeman coefficient must be positive, got {coefficient}")));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(invalid(format!("Zeeman sign must be ±1, got {sign}")));
        }
        Ok(Self { coefficient, sign })
    }
}

impl Default for ZeemanConversion {
    /// Places the (2,±1) resonance of the 3.9 μm box at 1.78 G.
    fn default() -> Self {
        Self { coefficient: 59.3, sign: -1.0 }
    }
}

/// Quadratic Zeeman energy (J) for a field in gauss.
pub fn q_from_field(b_field: f64, conv: &ZeemanConversion) -> Result<f64> {
    if !(b_field >= 0.0) || !b_field.is_finite() {
        return Err(invalid(format!("field must be non-negative, got {b_field}")));
    }
    Ok(conv.sign * PLANCK * conv.coefficient * b_field * b_field)
}
