//! Lawson–Hanson active-set nonnegative least squares.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `‖A x − b‖₂`
    pub residual: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out before the KKT conditions held.
    pub converged: bool,
}

/// Minimizes `‖A x − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iterations: usize) -> NnlsSolution {
    let n = a.ncols();
    let scale = a.amax().max(1.0) * b.amax().max(1.0);
    let tol = 1e-13 * scale * (a.nrows().max(n) as f64);

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose entry step failed numerically; cleared after any progress.
    let mut skipped = vec![false; n];
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < max_iterations {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !skipped[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let entering = match candidate {
            Some(j) if w[j] > tol => j,
            _ => {
                converged = !skipped.iter().any(|&s| s);
                break;
            }
        };
        passive[entering] = true;

        let mut first = true;
        loop {
            iterations += 1;
            let s = passive_least_squares(a, b, &passive);
            if first && s[entering] <= tol {
                passive[entering] = false;
                skipped[entering] = true;
                break;
            }
            if first {
                skipped.iter_mut().for_each(|s| *s = false);
                first = false;
            }
            let blocking = (0..n).filter(|&j| passive[j] && s[j] <= 0.0);
            let mut alpha = f64::INFINITY;
            for j in blocking {
                let step = x[j] / (x[j] - s[j]);
                if step < alpha {
                    alpha = step;
                }
            }
            if !alpha.is_finite() {
                x = s;
                break;
            }
            x += (&s - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if iterations >= max_iterations {
                break 'outer;
            }
        }
    }

    let residual = (a * &x - b).norm();
    NnlsSolution {
        x,
        residual,
        iterations,
        converged,
    }
}

/// Unconstrained least squares on the passive columns, zero elsewhere.
fn passive_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let mut out = DVector::zeros(passive.len());
    if cols.is_empty() {
        return out;
    }
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    let sol = svd.solve(b, eps).expect("u and v were computed");
    for (k, &j) in cols.iter().enumerate() {
        out[j] = sol[k];
    }
    out
}
