//! Nonnegative least squares by the Lawson–Hanson active-set method.
//!
//! Works on the normal equations: minimize ½wᵀGw − hᵀw subject to w ≥ 0,
//! which for G = AᵀA, h = Aᵀy is ½‖Aw − y‖² up to a constant.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub weights: Vec<f64>,
    /// Objective gradient Gw − h at the solution.
    pub gradient: Vec<f64>,
    pub iterations: usize,
}

/// Solves the problem given the m×m Gram matrix `g` and `h`.
pub fn nnls_normal(g: &DMatrix<f64>, h: &DVector<f64>) -> Result<NnlsSolution> {
    let m = h.len();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    if g.nrows() != m || g.ncols() != m {
        return Err(invalid("Gram matrix shape does not match right-hand side"));
    }
    if g.iter().chain(h.iter()).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite entry in least-squares system"));
    }
    let scale = g.diagonal().iter().cloned().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale * (m as f64);
    let mut w = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    let max_outer = 3 * m + 10;
    let mut iterations = 0;

    for _ in 0..max_outer {
        let descent = h - g * &w;
        let candidate = (0..m)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| descent[a].total_cmp(&descent[b]))
            .filter(|&j| descent[j] > tol);
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            iterations += 1;
            let z = solve_passive(g, h, &passive)?;
            let feasible = (0..m).filter(|&i| passive[i]).all(|i| z[i] > 0.0);
            if feasible {
                w = z;
                break;
            }
            let alpha = (0..m)
                .filter(|&i| passive[i] && z[i] <= 0.0)
                .map(|i| w[i] / (w[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            for i in 0..m {
                if passive[i] {
                    w[i] += alpha * (z[i] - w[i]);
                    if w[i] <= tol.max(1e-15 * w.amax()) {
                        w[i] = 0.0;
                        passive[i] = false;
                    }
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let gradient = (g * &w - h).iter().copied().collect();
    Ok(NnlsSolution { weights: w.iter().copied().collect(), gradient, iterations })
}

/// Unconstrained solve on the passive set; other components are zero.
fn solve_passive(g: &DMatrix<f64>, h: &DVector<f64>, passive: &[bool]) -> Result<DVector<f64>> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |r, c| g[(idx[r], idx[c])]);
    let rhs = DVector::from_fn(k, |r, _| h[idx[r]]);
    let sol = match sub.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => sub.lu().solve(&rhs).ok_or(Error::DegenerateFit)?,
    };
    let mut z = DVector::zeros(passive.len());
    for (r, &i) in idx.iter().enumerate() {
        z[i] = sol[r];
    }
    Ok(z)
}

/// Solves min ‖Aw − y‖ with w ≥ 0 for column-major design `columns`.
pub fn nnls(columns: &[Vec<f64>], y: &[f64]) -> Result<NnlsSolution> {
    if columns.is_empty() {
        return Err(Error::EmptyInput);
    }
    if columns.iter().any(|c| c.len() != y.len()) {
        return Err(invalid("design column length differs from data length"));
    }
    let m = columns.len();
    let g = DMatrix::from_fn(m, m, |r, c| dot(&columns[r], &columns[c]));
    let h = DVector::from_fn(m, |r, _| dot(&columns[r], y));
    nnls_normal(&g, &h)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive oracle: best unconstrained solution over every support.
    fn brute_force(cols: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
        let m = cols.len();
        let mut best = (vec![0.0; m], dot(y, y));
        for mask in 1u32..(1 << m) {
            let idx: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            let k = idx.len();
            let g = DMatrix::from_fn(k, k, |r, c| dot(&cols[idx[r]], &cols[idx[c]]));
            let h = DVector::from_fn(k, |r, _| dot(&cols[idx[r]], y));
            let Some(sol) = g.lu().solve(&h) else { continue };
            if sol.iter().any(|&v| v < 0.0) {
                continue;
            }
            let mut w = vec![0.0; m];
            for (r, &i) in idx.iter().enumerate() {
                w[i] = sol[r];
            }
            let res = residual(cols, y, &w);
            if res < best.1 {
                best = (w, res);
            }
        }
        best
    }

    fn residual(cols: &[Vec<f64>], y: &[f64], w: &[f64]) -> f64 {
        (0..y.len())
            .map(|p| {
                let f: f64 = cols.iter().zip(w).map(|(c, wi)| c[p] * wi).sum();
                (f - y[p]).powi(2)
            })
            .sum()
    }

    #[test]
    fn recovers_exact_nonnegative_mix() {
        let cols = vec![vec![1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, 0.5], vec![1.0, 1.0, 0.0, 0.0]];
        let truth = [0.3, 0.0, 1.2];
        let y: Vec<f64> = (0..4).map(|p| cols.iter().zip(&truth).map(|(c, w)| c[p] * w).sum()).collect();
        let sol = nnls(&cols, &y).unwrap();
        for (a, b) in sol.weights.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn clips_negative_direction() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = nnls(&cols, &[2.0, -3.0]).unwrap();
        assert_eq!(sol.weights, vec![2.0, 0.0]);
        assert!(sol.gradient[1] >= 0.0);
    }

    #[test]
    fn empty_basis_is_error() {
        assert_eq!(nnls(&[], &[1.0]), Err(Error::EmptyInput));
    }

    proptest! {
        #[test]
        fn matches_support_enumeration_and_kkt(
            data in proptest::collection::vec(-1.0f64..1.0, 4 * 12),
            y in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let cols: Vec<Vec<f64>> = data.chunks(12).map(|c| c.to_vec()).collect();
            let sol = nnls(&cols, &y).unwrap();
            let (_, best) = brute_force(&cols, &y);
            let got = residual(&cols, &y, &sol.weights);
            prop_assert!(got <= best + 1e-9 * (1.0 + best));
            for (w, g) in sol.weights.iter().zip(&sol.gradient) {
                prop_assert!(*w >= 0.0);
                if *w == 0.0 {
                    prop_assert!(*g >= -1e-8);
                } else {
                    prop_assert!(g.abs() < 1e-8);
                }
            }
        }
    }
}
