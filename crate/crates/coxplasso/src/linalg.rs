//! Small dense symmetric solves used for unpenalized updates and Newton steps.
//!
//! Systems here are tiny (modifier counts, Newton on a handful of features),
//! so a plain Cholesky with a ridge retry covers every call site without
//! pulling in a LAPACK backend.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Cholesky factor (lower triangular) of a symmetric positive definite matrix.
pub struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    pub fn new(a: &Array2<f64>) -> Option<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return None;
        }
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut diag = a[[j, j]];
            for k in 0..j {
                diag -= l[[j, k]] * l[[j, k]];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let dsq = diag.sqrt();
            l[[j, j]] = dsq;
            for i in (j + 1)..n {
                let mut v = a[[i, j]];
                for k in 0..j {
                    v -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = v / dsq;
            }
        }
        Some(Self { l })
    }

    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.l.nrows();
        let mut y = b.clone();
        for i in 0..n {
            for k in 0..i {
                let t = y[k];
                y[i] -= self.l[[i, k]] * t;
            }
            y[i] /= self.l[[i, i]];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = y[k];
                y[i] -= self.l[[k, i]] * t;
            }
            y[i] /= self.l[[i, i]];
        }
        y
    }
}

/// Solve `a x = b` for symmetric positive semidefinite `a`, adding a ridge of
/// `1e-8 * trace / n` (escalating by powers of ten) when the plain Cholesky
/// fails.
pub fn solve_spd_ridge(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Array1::zeros(0));
    }
    if let Some(ch) = Cholesky::new(a) {
        return Ok(ch.solve(b));
    }
    let trace: f64 = (0..n).map(|i| a[[i, i]]).sum();
    let base = 1e-8 * (trace.abs().max(1.0)) / n as f64;
    let mut ridge = base;
    for _ in 0..12 {
        let mut am = a.clone();
        for i in 0..n {
            am[[i, i]] += ridge;
        }
        if let Some(ch) = Cholesky::new(&am) {
            return Ok(ch.solve(b));
        }
        ridge *= 10.0;
    }
    Err(Error::SingularGram)
}

/// Permutation sorting `values` ascending; equal values keep index order.
pub fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let b = array![2.0, 5.0];
        let x = solve_spd_ridge(&a, &b).unwrap();
        // direct solve: inv([[4,2],[2,3]]) = 1/8 [[3,-2],[-2,4]]
        assert!((x[0] - (3.0 * 2.0 - 2.0 * 5.0) / 8.0).abs() < 1e-12);
        assert!((x[1] - (-2.0 * 2.0 + 4.0 * 5.0) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn singular_system_falls_back_to_ridge() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let b = array![2.0, 2.0];
        let x = solve_spd_ridge(&a, &b).unwrap();
        // ridged solution stays finite and symmetric (up to the conditioning
        // the ridge leaves behind)
        assert!(x[0].is_finite() && x[1].is_finite());
        assert!((x[0] - x[1]).abs() < 1e-6);
    }

    #[test]
    fn argsort_breaks_ties_by_index() {
        assert_eq!(argsort(&[2.0, 1.0, 2.0, 0.5]), vec![3, 1, 0, 2]);
    }
}
