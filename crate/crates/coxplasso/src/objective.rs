//! Weighted Breslow partial log-likelihood in the linear predictor, its
//! gradient and diagonal Hessian, and the quadratic working approximation.
//!
//! The solver minimizes `f = -(1/n) * partial_loglik + penalty`; the working
//! problem built here is the second-order expansion of that loss at the
//! current predictor.
//!
//! All computations recentre eta by its maximum before exponentiating (the
//! partial likelihood is shift invariant, so this is exact) and accumulate
//! risk-set denominators over the nested suffix structure in O(n + m).

use ndarray::{Array1, Array2};

use crate::survival::RiskSetIndex;

/// Gradient and diagonal Hessian of the partial log-likelihood at `eta`.
#[derive(Debug, Clone)]
pub struct QuadraticApprox {
    /// `l'(eta)`, length n.
    pub grad: Array1<f64>,
    /// Diagonal of `l''(eta)`, length n, nonpositive.
    pub hess_diag: Array1<f64>,
}

/// Working weights `-l''` and responses `eta - l'/l''` for the penalized
/// weighted least-squares step.
#[derive(Debug, Clone)]
pub struct WorkingData {
    pub weights: Array1<f64>,
    pub response: Array1<f64>,
}

/// `eta_j = z_j'theta0 + x_j'beta + w_j'theta` for every observation.
pub fn linear_predictor(
    z: &Array2<f64>,
    x: &Array2<f64>,
    w: &Array2<f64>,
    theta0: &Array1<f64>,
    beta: &Array1<f64>,
    theta: &Array2<f64>,
) -> Array1<f64> {
    let n = x.nrows();
    let nz = z.ncols();
    let p = x.ncols();
    let mut eta = Array1::zeros(n);
    for l in 0..nz {
        if theta0[l] != 0.0 {
            eta.scaled_add(theta0[l], &z.column(l));
        }
    }
    for k in 0..p {
        if beta[k] != 0.0 {
            eta.scaled_add(beta[k], &x.column(k));
        }
        for l in 0..nz {
            let t = theta[[k, l]];
            if t != 0.0 {
                eta.scaled_add(t, &w.column(k * nz + l));
            }
        }
    }
    eta
}

/// Log risk-set denominators `log S_i = log sum_{j in R_i} w_j e^{eta_j}`,
/// plus the shifted per-observation terms `eps_j = e^{eta_j - shift}` and
/// shifted denominators `s_i = S_i e^{-shift}`.
struct Denominators {
    shift: f64,
    eps: Vec<f64>,
    s: Vec<f64>,
}

/// Spread beyond which shifted exponentials saturate. Far outside the
/// solver's working range (|eta| <= 30); keeps the prefix-sum accumulations
/// free of overflow for arbitrary inputs.
const ETA_SPREAD_CAP: f64 = 150.0;

fn denominators(eta: &Array1<f64>, idx: &RiskSetIndex, weight: &Array1<f64>) -> Denominators {
    let n = eta.len();
    let shift = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let eps: Vec<f64> = (0..n)
        .map(|j| (eta[j] - shift).max(-ETA_SPREAD_CAP).exp())
        .collect();
    // suffix sums of w*eps over the time-sorted order
    let order = idx.order();
    let mut suffix = vec![0.0f64; n + 1];
    for r in (0..n).rev() {
        let j = order[r];
        suffix[r] = suffix[r + 1] + weight[j] * eps[j];
    }
    let s: Vec<f64> = idx.risk_start().iter().map(|&r| suffix[r]).collect();
    Denominators { shift, eps, s }
}

/// Breslow-weighted partial log-likelihood.
pub fn partial_loglik(eta: &Array1<f64>, idx: &RiskSetIndex, weight: &Array1<f64>) -> f64 {
    let den = denominators(eta, idx, weight);
    let mut ll = 0.0;
    for i in 0..idx.m() {
        for &j in idx.failures_at(i) {
            ll += weight[j] * eta[j];
        }
        ll -= idx.tied_weight(i) * (den.shift + den.s[i].ln());
    }
    ll
}

/// Gradient and diagonal Hessian of the partial log-likelihood in eta.
pub fn derivatives(
    eta: &Array1<f64>,
    idx: &RiskSetIndex,
    weight: &Array1<f64>,
) -> QuadraticApprox {
    let n = eta.len();
    let den = denominators(eta, idx, weight);
    let m = idx.m();
    // prefix sums over failure times of d_i/s_i and d_i/s_i^2 (shifted units)
    let mut a = vec![0.0f64; m + 1];
    let mut b = vec![0.0f64; m + 1];
    for i in 0..m {
        let (da, db) = if den.s[i] > 0.0 {
            let r = idx.tied_weight(i) / den.s[i];
            (r, r / den.s[i])
        } else {
            // risk set whose shifted denominator underflowed: every member's
            // eps is zero, so it contributes nothing
            (0.0, 0.0)
        };
        a[i + 1] = a[i] + da;
        b[i + 1] = b[i] + db;
    }
    let mut grad = Array1::zeros(n);
    let mut hess = Array1::zeros(n);
    for j in 0..n {
        let c = idx.n_risk_times(j);
        let we = weight[j] * den.eps[j];
        let g = we * a[c];
        grad[j] = weight[j] * f64::from(idx_status(idx, j)) - g;
        hess[j] = -(g - we * we * b[c]);
    }
    QuadraticApprox {
        grad,
        hess_diag: hess,
    }
}

// delta_j: whether j appears in some tie group. Cheaper than threading the
// dataset through: j fails iff it is in D_i for the last time it is at risk.
fn idx_status(idx: &RiskSetIndex, j: usize) -> u8 {
    let c = idx.n_risk_times(j);
    if c == 0 {
        return 0;
    }
    u8::from(idx.failures_at(c - 1).contains(&j))
}

/// Threshold below which a curvature entry is treated as zero and the
/// observation is dropped from the working problem for this iteration.
const CURVATURE_FLOOR_REL: f64 = 1e-12;

/// Working weights and responses for the penalized WLS step. Entries with
/// (numerically) zero curvature get weight 0 and response `eta_j`.
pub fn working_problem(approx: &QuadraticApprox, eta: &Array1<f64>) -> WorkingData {
    let n = eta.len();
    let wmax = approx
        .hess_diag
        .iter()
        .map(|h| -h)
        .fold(0.0f64, f64::max);
    let floor = wmax * CURVATURE_FLOOR_REL;
    let mut weights = Array1::zeros(n);
    let mut response = Array1::zeros(n);
    for j in 0..n {
        let w = -approx.hess_diag[j];
        if w > floor {
            weights[j] = w;
            response[j] = eta[j] + approx.grad[j] / w;
        } else {
            weights[j] = 0.0;
            response[j] = eta[j];
        }
    }
    WorkingData { weights, response }
}
