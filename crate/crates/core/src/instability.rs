//! Bogoliubov stability of the paired box modes.
//!
//! Each (n, l) pairing obeys iħ d/dt (a₊, a₋†)ᵀ = M (a₊, a₋†)ᵀ with
//! M = [[ε+q, Ω], [−Ω, −(ε+q)]], whose eigenvalues are ±ξ,
//! ξ² = (ε+q)² − Ω².

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::box_modes::{energy_2d, ModeIndex};
use crate::error::{invalid, Error, Result};
use crate::phys::{joule_to_hz, SystemParams, HBAR, PLANCK};

/// Below this |sin 2θ| the closed form is replaced by the equivalent
/// cos/sinc form; θ from acos loses digits as |cos 2θ| → 1.
const MARGINAL_SIN2THETA: f64 = 1e-2;
/// Largest tail weight tolerated when truncating a squeezed state.
pub const SQUEEZE_TAIL: f64 = 1e-14;

/// Bogoliubov eigenvalue ξ (J), purely real or purely imaginary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEigenvalue {
    pub xi: Complex64,
}

impl ComplexEigenvalue {
    pub fn is_unstable(&self) -> bool {
        self.xi.im > 0.0
    }
}

/// ξ = √((ε+q)² − Ω²) with Im ξ ≥ 0.
pub fn xi(eps: f64, q: f64, omega: f64) -> ComplexEigenvalue {
    let a = eps + q;
    // (a−Ω)(a+Ω) keeps the sign exact at the marginal point
    let d = (a - omega) * (a + omega);
    let xi = if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    };
    ComplexEigenvalue { xi }
}

/// Im(ξ)/h in Hz; zero for stable modes.
pub fn instability_rate(eps: f64, q: f64, omega: f64) -> f64 {
    xi(eps, q, omega).xi.im / PLANCK
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub q_over_h: f64,
    /// Rates in Hz, one per scanned mode.
    pub rates: Vec<f64>,
}

/// Instability rate of every mode at every q (J).
pub fn spectrum_scan(params: &SystemParams, modes: &[ModeIndex], q_grid: &[f64]) -> Result<Vec<SpectrumRow>> {
    if modes.is_empty() {
        return Err(invalid("mode list is empty"));
    }
    if q_grid.is_empty() {
        return Err(invalid("q grid is empty"));
    }
    params.validate()?;
    let energies: Vec<f64> = modes
        .iter()
        .map(|&m| energy_2d(m, params.r_tf, params.constants.atom_mass))
        .collect();
    Ok(q_grid
        .iter()
        .map(|&q| SpectrumRow {
            q_over_h: joule_to_hz(q),
            rates: energies.iter().map(|&e| instability_rate(e, q, params.omega_spin)).collect(),
        })
        .collect())
}

/// Resonance positions q = −ε_{n,l} (J), in the order of `modes`.
pub fn resonance_positions(params: &SystemParams, modes: &[ModeIndex]) -> Vec<f64> {
    modes
        .iter()
        .map(|&m| -energy_2d(m, params.r_tf, params.constants.atom_mass))
        .collect()
}

/// Mixing angle θ with cos 2θ = (ε+q)/Ω, principal complex arccos.
pub fn mixing_theta(eps: f64, q: f64, omega: f64) -> Result<Complex64> {
    if omega == 0.0 {
        return Err(Error::UndefinedMixing);
    }
    Ok(0.5 * Complex64::new((eps + q) / omega, 0.0).acos())
}

/// Evolution coefficients (U, Ũ) of a(t) = U a(0) + Ũ b†(0) after time `t` (s).
///
/// In terms of the mixing angle and the hyperbolic rate κ = Ω sin 2θ
/// (κ² = Ω² − (ε+q)²):
///
///   U = (−i / sin 2θ) sinh(κt/ħ + 2iθ),   Ũ = (−i / sin 2θ) sinh(κt/ħ).
///
/// Close to the marginal point, where sin 2θ → 0, the same functions are
/// evaluated through U = cos(ξt/ħ) − i(ε+q) sin(ξt/ħ)/ξ, Ũ = −iΩ sin(ξt/ħ)/ξ.
pub fn bogoliubov_coeffs(eps: f64, q: f64, omega: f64, t: f64) -> Result<(Complex64, Complex64)> {
    let theta = mixing_theta(eps, q, omega)?;
    let two_theta = 2.0 * theta;
    let s2 = two_theta.sin();
    let tau = t / HBAR;
    if s2.norm() < MARGINAL_SIN2THETA {
        return Ok(marginal_coeffs(eps + q, omega, tau));
    }
    let i = Complex64::i();
    let kappa_tau = omega * s2 * tau;
    let pref = -i / s2;
    Ok((pref * (kappa_tau + i * two_theta).sinh(), pref * kappa_tau.sinh()))
}

fn marginal_coeffs(a: f64, omega: f64, tau: f64) -> (Complex64, Complex64) {
    let xi2 = (a - omega) * (a + omega);
    let (c, sinc) = cos_sinc(xi2, tau);
    (Complex64::new(c, -a * sinc), Complex64::new(0.0, -omega * sinc))
}

/// cos(ξτ) and sin(ξτ)/ξ as real functions of ξ², analytic through ξ = 0.
fn cos_sinc(xi2: f64, tau: f64) -> (f64, f64) {
    let z = xi2 * tau * tau;
    if z.abs() < 1e-6 {
        let c = 1.0 - z / 2.0 + z * z / 24.0;
        let s = tau * (1.0 - z / 6.0 + z * z / 120.0);
        (c, s)
    } else if xi2 > 0.0 {
        let x = xi2.sqrt();
        ((x * tau).cos(), (x * tau).sin() / x)
    } else {
        let k = (-xi2).sqrt();
        ((k * tau).cosh(), (k * tau).sinh() / k)
    }
}

/// Two-mode squeezed vacuum Σ c_k |k,k⟩ truncated at `k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeState {
    pub s: f64,
    pub coeffs: Vec<Complex64>,
}

impl SqueezeState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn mean_pairs(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(k, c)| k as f64 * c.norm_sqr()).sum()
    }

    /// Pair-number distribution |c_k|².
    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Smallest k_max whose discarded tail tanh^{2(k_max+1)}(s) is below
/// [`SQUEEZE_TAIL`].
pub fn required_k_max(s: f64) -> usize {
    let t2 = s.tanh().powi(2);
    if t2 == 0.0 {
        return 0;
    }
    if t2 >= 1.0 {
        return usize::MAX;
    }
    let k = (SQUEEZE_TAIL.ln() / t2.ln()).ceil() as usize;
    // guard against rounding at the boundary
    (k.saturating_sub(2)..=k + 1)
        .find(|&k| t2.powi(k as i32 + 1) < SQUEEZE_TAIL)
        .unwrap_or(k + 1)
}

/// c_k = (−i)^k tanh^k(s) / cosh(s) for k = 0..=k_max.
pub fn squeezed_coeffs(s: f64, k_max: usize) -> Result<SqueezeState> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(invalid(format!("squeeze parameter must be non-negative, got {s}")));
    }
    let t = s.tanh();
    let tail = t.powi(2 * (k_max as i32 + 1));
    if tail >= SQUEEZE_TAIL {
        return Err(Error::Truncation { k_max, tail });
    }
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let mut mag = 1.0 / s.cosh();
    let coeffs = (0..=k_max)
        .map(|k| {
            let c = phases[k % 4] * mag;
            mag *= t;
            c
        })
        .collect();
    Ok(SqueezeState { s, coeffs })
}

/// Mean pair number sinh²(s).
pub fn mean_pairs(s: f64) -> f64 {
    s.sinh().powi(2)
}

/// Squeeze parameter Im(ξ)·t/ħ accumulated in time `t` (s).
pub fn squeeze_parameter(eps: f64, q: f64, omega: f64, t: f64) -> f64 {
    2.0 * PI * instability_rate(eps, q, omega) * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phys::hz_to_joule;
    use approx::assert_relative_eq;

    type M2 = [[Complex64; 2]; 2];

    fn mul(a: &M2, b: &M2) -> M2 {
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    /// exp(−iMt/ħ) by scaling and squaring of a Taylor series.
    pub(crate) fn expm_oracle(a: f64, omega: f64, tau: f64) -> M2 {
        let i = Complex64::i();
        let m: M2 = [
            [-i * a * tau, -i * omega * tau],
            [i * omega * tau, i * a * tau],
        ];
        let norm = m.iter().flatten().map(|z| z.norm()).sum::<f64>();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scale = 0.5f64.powi(squarings);
        let ms: M2 = [[m[0][0] * scale, m[0][1] * scale], [m[1][0] * scale, m[1][1] * scale]];
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut result: M2 = [[one, zero], [zero, one]];
        let mut term = result;
        for k in 1..30 {
            term = mul(&term, &ms);
            let inv = 1.0 / k as f64;
            term = [[term[0][0] * inv, term[0][1] * inv], [term[1][0] * inv, term[1][1] * inv]];
            for r in 0..2 {
                for c in 0..2 {
                    result[r][c] += term[r][c];
                }
            }
        }
        for _ in 0..squarings {
            result = mul(&result, &result);
        }
        result
    }

    #[test]
    fn xi_regimes() {
        let om = 3.0;
        assert_eq!(xi(1.0, -1.0, om).xi, Complex64::new(0.0, 3.0));
        assert_eq!(xi(2.0, 3.0, 0.0).xi, Complex64::new(5.0, 0.0));
        assert_eq!(xi(-2.0, -3.0, 0.0).xi, Complex64::new(5.0, 0.0));
        assert_eq!(xi(1.0, 2.0, om).xi, Complex64::new(0.0, 0.0));
        assert!(xi(1.0, 1.0, om).is_unstable());
        assert!(!xi(1.0, 5.0, om).is_unstable());
    }

    #[test]
    fn rate_on_and_off_resonance() {
        let om = hz_to_joule(30.0);
        let eps = hz_to_joule(188.0);
        assert_relative_eq!(instability_rate(eps, -eps, om), 30.0, max_relative = 1e-12);
        assert_eq!(instability_rate(eps, -eps + om, om), 0.0);
        assert_eq!(instability_rate(eps, -eps + 2.0 * om, om), 0.0);
        let d = hz_to_joule(7.0);
        assert_eq!(instability_rate(eps, -eps + d, om), instability_rate(eps, -eps - d, om));
    }

    #[test]
    fn xi_is_continuous_across_the_boundary() {
        let om = 1.0;
        for d in [1e-2, 1e-4, 1e-6, 1e-8] {
            let inside = xi(om - d, 0.0, om).xi;
            let outside = xi(om + d, 0.0, om).xi;
            assert!(inside.re == 0.0 && inside.im > 0.0);
            assert!(outside.im == 0.0 && outside.re > 0.0);
            assert!(inside.norm() < 2.0 * d.sqrt() && outside.norm() < 2.0 * d.sqrt());
        }
    }

    #[test]
    fn scan_peaks_at_mode_energies() {
        let p = SystemParams::rb87_cylindrical();
        let modes = [
            ModeIndex { n: 1, l: 0 },
            ModeIndex { n: 1, l: 1 },
            ModeIndex { n: 1, l: -1 },
            ModeIndex { n: 2, l: 0 },
            ModeIndex { n: 2, l: 1 },
            ModeIndex { n: 3, l: 0 },
        ];
        let q: Vec<f64> = (0..=3500).map(|i| hz_to_joule(-350.0 + 0.1 * i as f64)).collect();
        let rows = spectrum_scan(&p, &modes, &q).unwrap();
        let res = resonance_positions(&p, &modes);
        for (k, &qr) in res.iter().enumerate() {
            let best = rows
                .iter()
                .max_by(|a, b| a.rates[k].total_cmp(&b.rates[k]))
                .unwrap();
            assert!((best.q_over_h - joule_to_hz(qr)).abs() <= 0.1, "mode {k}");
            assert!(rows.iter().all(|r| r.rates[k] <= 30.0 + 1e-9 && r.rates[k] >= 0.0));
        }
        assert!(rows.iter().all(|r| r.rates[1] == r.rates[2]));
        let hz: Vec<f64> = res.iter().map(|&e| -joule_to_hz(e)).collect();
        for (got, want) in hz.iter().zip([22.1, 56.1, 56.1, 116.5, 188.1, 286.2]) {
            assert!((got - want).abs() < 0.15);
        }
        assert!(spectrum_scan(&p, &[], &q).is_err());
        assert!(spectrum_scan(&p, &modes, &[]).is_err());
    }

    #[test]
    fn theta_special_values() {
        let t = mixing_theta(1.0, -1.0, 2.0).unwrap();
        assert_relative_eq!(t.re, PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!((2.0 * t).sin().re, 1.0, max_relative = 1e-15);
        assert_eq!(mixing_theta(1.0, 1.0, 2.0).unwrap().norm(), 0.0);
        assert!(mixing_theta(5.0, 0.0, 1.0).unwrap().im.abs() > 0.0);
        assert_eq!(mixing_theta(1.0, 0.0, 0.0), Err(Error::UndefinedMixing));
        assert_eq!(bogoliubov_coeffs(1.0, 0.0, 0.0, 1.0).unwrap_err(), Error::UndefinedMixing);
    }

    #[test]
    fn coefficients_at_time_zero() {
        for a in [-3.0, -1.0, -0.2, 0.0, 0.5, 1.0, 4.0] {
            let (u, ut) = bogoliubov_coeffs(hz_to_joule(a), 0.0, hz_to_joule(1.0), 0.0).unwrap();
            assert!((u - 1.0).norm() < 1e-12, "a={a}: {u}");
            assert!(ut.norm() < 1e-12);
        }
    }

    #[test]
    fn resonant_pair_growth() {
        let om = hz_to_joule(30.0);
        for t in [0.0, 1e-3, 5e-3, 17e-3] {
            let (_, ut) = bogoliubov_coeffs(hz_to_joule(100.0), hz_to_joule(-100.0), om, t).unwrap();
            let s = om * t / HBAR;
            assert_relative_eq!(ut.norm(), s.sinh(), max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn matches_matrix_exponential_in_each_regime() {
        let om = hz_to_joule(20.0);
        for a_hz in [-60.0, -20.0, -19.9999999, -5.0, 0.0, 12.0, 20.0, 20.0000001, 45.0, 300.0] {
            for t in [1e-4, 3e-3, 1.2e-2] {
                let a = hz_to_joule(a_hz);
                let (u, ut) = bogoliubov_coeffs(a, 0.0, om, t).unwrap();
                let m = expm_oracle(a, om, t / HBAR);
                let scale = u.norm().max(1.0);
                assert!((u - m[0][0]).norm() < 1e-8 * scale, "a={a_hz} t={t}: {u} vs {}", m[0][0]);
                assert!((ut - m[0][1]).norm() < 1e-8 * scale, "a={a_hz} t={t}: {ut} vs {}", m[0][1]);
                assert!((u.norm_sqr() - ut.norm_sqr() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn squeezed_state_identities() {
        let st = squeezed_coeffs(0.0, 0).unwrap();
        assert_eq!(st.coeffs, vec![Complex64::new(1.0, 0.0)]);
        let st = squeezed_coeffs(0.0, 5).unwrap();
        assert_eq!(st.coeffs[0], Complex64::new(1.0, 0.0));
        assert!(st.coeffs[1..].iter().all(|c| c.norm() == 0.0));
        for s in [0.1, 0.5, 1.0, 2.0, 3.5] {
            let st = squeezed_coeffs(s, required_k_max(s)).unwrap();
            assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((st.mean_pairs() - mean_pairs(s)).abs() < 1e-10 * mean_pairs(s).max(1.0));
        }
        assert_relative_eq!(mean_pairs(1.0), 1.381_097_845_541_816, max_relative = 1e-14);
        assert_eq!(mean_pairs(0.0), 0.0);
        let st = squeezed_coeffs(1.0, required_k_max(1.0)).unwrap();
        assert_eq!(st.coeffs[1].re, 0.0);
        assert!(st.coeffs[1].im < 0.0);
        assert!(st.coeffs[2].re < 0.0);
    }

    #[test]
    fn truncation_is_flagged() {
        let e = squeezed_coeffs(1.0, 3).unwrap_err();
        assert!(matches!(e, Error::Truncation { k_max: 3, .. }));
        let k = required_k_max(1.0);
        assert!(squeezed_coeffs(1.0, k).is_ok());
        assert!(squeezed_coeffs(1.0, k - 1).is_err());
        assert!(squeezed_coeffs(-0.1, 10).is_err());
    }
}
