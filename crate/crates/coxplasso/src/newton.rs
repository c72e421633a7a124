//! Dense Newton-Raphson fits of the unpenalized Cox partial likelihood.
//!
//! Unlike the coordinate-descent solver, these use the full Hessian and a
//! direct solve. They back the modifier-only fit that anchors `lambda_max`,
//! the unpenalized time-interaction comparator in the benchmark, and serve as
//! an independent route for checking the penalized solver at `lambda = 0`.

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::linalg::solve_spd_ridge;
use crate::survival::RiskSetIndex;

pub struct NewtonFit {
    pub beta: Array1<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Loglik, score and observed information of the Breslow partial likelihood
/// for a plain design matrix (one row per observation).
fn cox_derivatives_full(
    v: &Array2<f64>,
    beta: &Array1<f64>,
    idx: &RiskSetIndex,
    weight: &Array1<f64>,
) -> (f64, Array1<f64>, Array2<f64>) {
    let n = v.nrows();
    let q = v.ncols();
    let eta: Array1<f64> = v.dot(beta);
    let shift = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let order = idx.order();
    let starts = idx.risk_start();
    let m = idx.m();

    let mut ll = 0.0;
    let mut grad = Array1::<f64>::zeros(q);
    let mut info = Array2::<f64>::zeros((q, q));

    let mut s0 = 0.0f64;
    let mut s1 = Array1::<f64>::zeros(q);
    let mut s2 = Array2::<f64>::zeros((q, q));
    let mut r = n;
    for i in (0..m).rev() {
        while r > starts[i] {
            r -= 1;
            let j = order[r];
            let e = weight[j] * (eta[j] - shift).exp();
            s0 += e;
            for a in 0..q {
                let va = v[[j, a]];
                s1[a] += e * va;
                for b in 0..=a {
                    s2[[a, b]] += e * va * v[[j, b]];
                }
            }
        }
        let d = idx.tied_weight(i);
        for &j in idx.failures_at(i) {
            ll += weight[j] * eta[j];
            for a in 0..q {
                grad[a] += weight[j] * v[[j, a]];
            }
        }
        ll -= d * (shift + s0.ln());
        for a in 0..q {
            let xa = s1[a] / s0;
            grad[a] -= d * xa;
            for b in 0..=a {
                let inc = d * (s2[[a, b]] / s0 - xa * s1[b] / s0);
                info[[a, b]] += inc;
            }
        }
    }
    for a in 0..q {
        for b in 0..a {
            info[[b, a]] = info[[a, b]];
        }
    }
    (ll, grad, info)
}

/// Unpenalized Cox fit by full-Hessian Newton-Raphson with step halving.
pub fn fit_cox(
    v: &Array2<f64>,
    idx: &RiskSetIndex,
    weight: &Array1<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonFit> {
    let q = v.ncols();
    let mut beta = Array1::<f64>::zeros(q);
    if q == 0 {
        let (ll, _, _) = cox_derivatives_full(v, &beta, idx, weight);
        return Ok(NewtonFit {
            beta,
            loglik: ll,
            converged: true,
            iterations: 0,
        });
    }
    let (mut ll, mut grad, mut info) = cox_derivatives_full(v, &beta, idx, weight);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        if grad.iter().all(|g| g.abs() <= tol) {
            converged = true;
            break;
        }
        let step = solve_spd_ridge(&info, &grad)?;
        let mut s = 1.0;
        loop {
            let cand = &beta + &(s * &step);
            let (cll, cgrad, cinfo) = cox_derivatives_full(v, &cand, idx, weight);
            if cll >= ll - 1e-12 || s < 1e-8 {
                beta = cand;
                ll = cll;
                grad = cgrad;
                info = cinfo;
                break;
            }
            s *= 0.5;
        }
    }
    if grad.iter().all(|g| g.abs() <= tol) {
        converged = true;
    }
    Ok(NewtonFit {
        beta,
        loglik: ll,
        converged,
        iterations,
    })
}

/// Same fit for a stacked design where each failure time forms a block of
/// rows (case rows plus at-risk rows) with its own denominator.
pub fn fit_cox_grouped(
    v: &Array2<f64>,
    is_case: &[bool],
    row_weight: &Array1<f64>,
    block_of_row: &[usize],
    block_d: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonFit> {
    let q = v.ncols();
    let mut beta = Array1::<f64>::zeros(q);
    let (mut ll, mut grad, mut info) =
        grouped_derivatives(v, &beta, is_case, row_weight, block_of_row, block_d);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        if grad.iter().all(|g| g.abs() <= tol) {
            converged = true;
            break;
        }
        let step = solve_spd_ridge(&info, &grad)?;
        let mut s = 1.0;
        loop {
            let cand = &beta + &(s * &step);
            let (cll, cgrad, cinfo) =
                grouped_derivatives(v, &cand, is_case, row_weight, block_of_row, block_d);
            if cll >= ll - 1e-12 || s < 1e-8 {
                beta = cand;
                ll = cll;
                grad = cgrad;
                info = cinfo;
                break;
            }
            s *= 0.5;
        }
    }
    if grad.iter().all(|g| g.abs() <= tol) {
        converged = true;
    }
    Ok(NewtonFit {
        beta,
        loglik: ll,
        converged,
        iterations,
    })
}

fn grouped_derivatives(
    v: &Array2<f64>,
    beta: &Array1<f64>,
    is_case: &[bool],
    row_weight: &Array1<f64>,
    block_of_row: &[usize],
    block_d: &[f64],
) -> (f64, Array1<f64>, Array2<f64>) {
    let nrows = v.nrows();
    let q = v.ncols();
    let n_blocks = block_d.len();
    let eta: Array1<f64> = v.dot(beta);

    let mut shift = vec![f64::NEG_INFINITY; n_blocks];
    for r in 0..nrows {
        shift[block_of_row[r]] = shift[block_of_row[r]].max(eta[r]);
    }
    let mut s0 = vec![0.0f64; n_blocks];
    let mut s1 = Array2::<f64>::zeros((n_blocks, q));
    let mut s2 = vec![Array2::<f64>::zeros((q, q)); n_blocks];
    for r in 0..nrows {
        let b = block_of_row[r];
        let e = row_weight[r] * (eta[r] - shift[b]).exp();
        s0[b] += e;
        for a in 0..q {
            let va = v[[r, a]];
            s1[[b, a]] += e * va;
            for c in 0..=a {
                s2[b][[a, c]] += e * va * v[[r, c]];
            }
        }
    }

    let mut ll = 0.0;
    let mut grad = Array1::<f64>::zeros(q);
    let mut info = Array2::<f64>::zeros((q, q));
    for r in 0..nrows {
        if is_case[r] {
            ll += row_weight[r] * eta[r];
            for a in 0..q {
                grad[a] += row_weight[r] * v[[r, a]];
            }
        }
    }
    for b in 0..n_blocks {
        let d = block_d[b];
        ll -= d * (shift[b] + s0[b].ln());
        for a in 0..q {
            let xa = s1[[b, a]] / s0[b];
            grad[a] -= d * xa;
            for c in 0..=a {
                let inc = d * (s2[b][[a, c]] / s0[b] - xa * s1[[b, c]] / s0[b]);
                info[[a, c]] += inc;
            }
        }
    }
    for a in 0..q {
        for c in 0..a {
            info[[c, a]] = info[[a, c]];
        }
    }
    (ll, grad, info)
}
