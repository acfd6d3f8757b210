//! Bessel functions of the first kind of integer order and their zeros.

use std::f64::consts::PI;

/// Below this argument the ascending series is used; above it, Miller's
/// backward recurrence.
const SERIES_LIMIT: f64 = 12.0;

/// J_l(x) for integer order l ≥ 0.
///
/// Negative arguments use J_l(−x) = (−1)^l J_l(x). Absolute accuracy is
/// better than 1e-12 for |x| ≤ 60.
pub fn bessel_j(l: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(l, -x);
        return if l.is_multiple_of(2) { v } else { -v };
    }
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        ascending_series(l, x)
    } else {
        miller(l, x)
    }
}

/// J_l(x) for signed order, J_{−l} = (−1)^l J_l.
pub fn bessel_j_signed(l: i32, x: f64) -> f64 {
    let v = bessel_j(l.unsigned_abs(), x);
    if l < 0 && l % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Derivative J_l'(x).
pub fn bessel_j_prime(l: u32, x: f64) -> f64 {
    if l == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(l - 1, x) - bessel_j(l + 1, x))
    }
}

fn ascending_series(l: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=l {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + l as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && k > q.sqrt() {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized with 1 = J_0 + 2 Σ J_{2k}.
fn miller(l: u32, x: f64) -> f64 {
    let top = x.max(l as f64);
    let mut m = (1.2 * top + 40.0) as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let two_over_x = 2.0 / x;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=m).rev() {
        // j holds J_k, jp1 holds J_{k+1}
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
        let idx = k - 1;
        if idx == l as usize {
            result = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    result / norm
}

/// McMahon's large-zero expansion for the n-th zero of J_l.
pub fn mcmahon_zero(n: u32, l: u32) -> f64 {
    let mu = 4.0 * (l as f64).powi(2);
    let b = (n as f64 + 0.5 * l as f64 - 0.25) * PI;
    let e = 8.0 * b;
    b - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

/// The n-th positive zero (n ≥ 1) of J_l.
///
/// Brackets the zero by scanning sign changes from x = l, then refines with
/// Newton steps started from the McMahon estimate, falling back to
/// bisection whenever a step leaves the bracket.
pub fn bessel_zero(n: u32, l: u32) -> f64 {
    assert!(n >= 1, "zero index starts at 1");
    const STEP: f64 = 0.2;
    let mut a = (l as f64).max(1e-3);
    let mut fa = bessel_j(l, a);
    let mut found = 0;
    let (lo, hi) = loop {
        let b = a + STEP;
        let fb = bessel_j(l, b);
        if fb == 0.0 {
            found += 1;
            if found == n {
                return b;
            }
        } else if fa.signum() != fb.signum() && fa != 0.0 {
            found += 1;
            if found == n {
                break (a, b);
            }
        }
        a = b;
        fa = fb;
    };
    refine_root(l, lo, hi, mcmahon_zero(n, l))
}

fn refine_root(l: u32, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
    let f_lo = bessel_j(l, lo);
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..100 {
        let f = bessel_j(l, x);
        if f == 0.0 {
            return x;
        }
        if f.signum() == f_lo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let d = bessel_j_prime(l, x);
        let mut next = x - f / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-15 * x || hi - lo < 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}
