//! Phase-sum statistics of the two-mode squeezed vacuum and the Monte
//! Carlo sampler built on them.
//!
//! The phase-sum variance π²/3 + 4 Σ (−1)^k tanh^k(s)/k² has circular
//! moments ρ_k = tanh^k(s), which are those of a wrapped Cauchy law with
//! concentration tanh(s). The sampler draws the phase-sum deviation from
//! that law, so its window variance equals [`phase_sum_variance`] for every
//! s, and it treats the phase difference as uniform.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::error::{invalid, Result};

const PI2_6: f64 = PI * PI / 6.0;

/// Li₂(z) for real z ≤ 1.
pub fn li2(z: f64) -> f64 {
    assert!(z <= 1.0, "li2 is real-valued only for z <= 1");
    if z == 1.0 {
        return PI2_6;
    }
    if z < -1.0 {
        // inversion: Li₂(z) = −π²/6 − ½ ln²(−z) − Li₂(1/z)
        let l = (-z).ln();
        return -PI2_6 - 0.5 * l * l - li2(1.0 / z);
    }
    if z < -0.5 {
        // Landen: maps [−1, −½) onto (⅓, ½]
        let l = (-z).ln_1p();
        return -li2(z / (z - 1.0)) - 0.5 * l * l;
    }
    if z > 0.5 {
        // reflection about ½
        return PI2_6 - z.ln() * (-z).ln_1p() - li2(1.0 - z);
    }
    let mut sum = 0.0;
    let mut p = z;
    let mut k = 1.0;
    loop {
        let term = p / (k * k);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
        k += 1.0;
        p *= z;
    }
    sum
}

/// dilog(x) = ∫₁ˣ ln t / (1 − t) dt = Li₂(1 − x), for x ∈ [0, 2].
pub fn dilog(x: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&x) {
        return Err(invalid(format!("dilog argument {x} outside [0, 2]")));
    }
    Ok(li2(1.0 - x))
}

/// Variance of φ_p + φ_q on a 2π window centred at the mean:
/// π²/3 + 4·dilog(1 + tanh s).
pub fn phase_sum_variance(s: f64) -> f64 {
    let t = s.tanh();
    (PI * PI / 3.0 + 4.0 * li2(-t)).max(0.0)
}

/// The phase sum of the squeezed pair is centred on −π/2 for every s.
pub fn phase_sum_mean() -> f64 {
    -FRAC_PI_2
}

/// Wraps an angle into [−π, π).
pub fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// One draw of the four mode phases of a twofold two-mode squeezed state.
///
/// Pairs are (+l, m_F=+1)↔(−l, m_F=−1) and (−l, +1)↔(+l, −1); both
/// squeezers carry the same pair number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPhaseDraw {
    /// φ_{n,+l,+1}
    pub plus_l_up: f64,
    /// φ_{n,−l,−1}
    pub minus_l_down: f64,
    /// φ_{n,−l,+1}
    pub minus_l_up: f64,
    /// φ_{n,+l,−1}
    pub plus_l_down: f64,
    pub pair_count: u64,
}

impl PairPhaseDraw {
    /// φ_{+l} − φ_{−l} in m_F = +1.
    pub fn difference_up(&self) -> f64 {
        wrap_phase(self.plus_l_up - self.minus_l_up)
    }

    /// φ_{+l} − φ_{−l} in m_F = −1.
    pub fn difference_down(&self) -> f64 {
        wrap_phase(self.plus_l_down - self.minus_l_down)
    }

    /// The two squeezed phase sums, wrapped.
    pub fn phase_sums(&self) -> (f64, f64) {
        (
            wrap_phase(self.plus_l_up + self.minus_l_down),
            wrap_phase(self.minus_l_up + self.plus_l_down),
        )
    }
}

/// Deviation of the phase sum from its mean: wrapped Cauchy with
/// concentration ρ = tanh s, sampled as 2·atan(((1−ρ)/(1+ρ))·tan(π(u−½)))
/// where (1−ρ)/(1+ρ) = e^{−2s}. Uniform at s = 0, a point mass as s → ∞.
pub fn sample_phase_sum_deviation<R: Rng + ?Sized>(s: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let x = (PI * (u - 0.5)).tan();
    wrap_phase(2.0 * ((-2.0 * s).exp() * x).atan())
}

/// Pair number from |c_k|² = (1 − tanh²s) tanh^{2k}s by inverse CDF,
/// P(K ≥ k) = tanh^{2k}s. Saturates at `u64::MAX` when tanh s rounds to 1.
pub fn sample_pair_count<R: Rng + ?Sized>(s: f64, rng: &mut R) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    if s == 0.0 {
        return 0;
    }
    // ln tanh²s = 2 ln(1 − 2/(e^{2s}+1))
    let log_t2 = 2.0 * (-2.0 / ((2.0 * s).exp() + 1.0)).ln_1p();
    let k = (u.ln() / log_t2).floor();
    if k.is_nan() {
        return 0;
    }
    k as u64
}

pub fn sample_pair_phases<R: Rng + ?Sized>(s: f64, rng: &mut R) -> Result<PairPhaseDraw> {
    if !(s >= 0.0) {
        return Err(invalid(format!("squeeze parameter must be non-negative, got {s}")));
    }
    let plus_l_up = rng.random_range(-PI..PI);
    let minus_l_up = rng.random_range(-PI..PI);
    let d1 = sample_phase_sum_deviation(s, rng);
    let d2 = sample_phase_sum_deviation(s, rng);
    let pair_count = sample_pair_count(s, rng);
    Ok(PairPhaseDraw {
        plus_l_up,
        minus_l_down: wrap_phase(phase_sum_mean() - plus_l_up + d1),
        minus_l_up,
        plus_l_down: wrap_phase(phase_sum_mean() - minus_l_up + d2),
        pair_count,
    })
}
