//! Stationarity certification for the penalized objective.
//!
//! At a self-consistent point the adjusted working residual equals the
//! log-likelihood gradient in eta, so the KKT system can be checked directly
//! from `l'(eta)`: zero blocks must satisfy the screening inequalities and
//! active blocks the subgradient equations with valid dual vectors.

use ndarray::{Array1, Array2};

use super::cd::soft_threshold;

/// Maximum KKT violation across the unpenalized part and all blocks.
#[allow(clippy::too_many_arguments)]
pub(crate) fn kkt_residual(
    grad_ll: &Array1<f64>,
    x: &Array2<f64>,
    w_int: &Array2<f64>,
    q: usize,
    z: Option<&Array2<f64>>,
    groups: Option<(&[usize], usize)>,
    beta: &Array1<f64>,
    theta: &Array2<f64>,
    lambda: f64,
    alpha: f64,
    n_norm: f64,
) -> f64 {
    let n_rows = x.nrows();
    let p = x.ncols();
    let lam1 = (1.0 - alpha) * lambda;
    let lam2 = alpha * lambda;
    let n = n_norm;
    let mut viol = 0.0f64;

    if let Some(z) = z {
        for l in 0..z.ncols() {
            let mut s = 0.0;
            for r in 0..n_rows {
                s += z[[r, l]] * grad_ll[r];
            }
            viol = viol.max((s / n).abs());
        }
    }
    if let Some((ids, ng)) = groups {
        let mut s = vec![0.0f64; ng];
        for r in 0..n_rows {
            s[ids[r]] += grad_ll[r];
        }
        for v in s {
            viol = viol.max((v / n).abs());
        }
    }

    for k in 0..p {
        let xk = x.column(k);
        let mut gx = 0.0;
        for r in 0..n_rows {
            gx += xk[r] * grad_ll[r];
        }
        gx /= n;
        let mut gw = vec![0.0f64; q];
        for (l, g) in gw.iter_mut().enumerate() {
            let wc = w_int.column(k * q + l);
            let mut s = 0.0;
            for r in 0..n_rows {
                s += wc[r] * grad_ll[r];
            }
            *g = s / n;
        }

        let bk = beta[k];
        let th = theta.row(k);
        let th_norm = th.iter().map(|v| v * v).sum::<f64>().sqrt();
        let joint_norm = (bk * bk + th_norm * th_norm).sqrt();

        if joint_norm == 0.0 {
            let slack = (lam1 * lam1 - gx * gx).max(0.0).sqrt();
            let snorm = gw
                .iter()
                .map(|g| {
                    let s = soft_threshold(*g, lam2);
                    s * s
                })
                .sum::<f64>()
                .sqrt();
            viol = viol.max((gx.abs() - lam1).max(0.0));
            viol = viol.max((snorm - (lam1 + slack)).max(0.0));
        } else {
            viol = viol.max((gx - lam1 * bk / joint_norm).abs());
            if th_norm == 0.0 {
                let snorm = gw
                    .iter()
                    .map(|g| {
                        let s = soft_threshold(*g, lam2);
                        s * s
                    })
                    .sum::<f64>()
                    .sqrt();
                viol = viol.max((snorm - lam1).max(0.0));
            } else {
                for l in 0..q {
                    let t = th[l];
                    if t != 0.0 {
                        let sub = lam1 * (t / joint_norm + t / th_norm) + lam2 * t.signum();
                        viol = viol.max((gw[l] - sub).abs());
                    } else {
                        viol = viol.max((gw[l].abs() - lam2).max(0.0));
                    }
                }
            }
        }
    }
    viol
}
