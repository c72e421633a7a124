//! Blockwise coordinate descent for the penalized weighted least-squares
//! working problem
//!
//! `(1/2n) sum_r w_r (y_r - eta_r)^2
//!     + lambda[(1-alpha) sum_k (|(beta_k, theta_k)|_2 + |theta_k|_2)
//!              + alpha sum_k |theta_k|_1]`
//!
//! where `eta_r` may include unpenalized modifier main effects (`Z theta0`)
//! and unpenalized per-group intercepts (used by the stacked logistic
//! problem). Each block is first screened for a zero solution, then for a
//! main-effect-only solution, and only then handed to the proximal-gradient
//! update. The three-term penalty's proximal operator is computed by the
//! leaf-to-root composition: l1 on theta, group shrink of theta, group shrink
//! of (beta_k, theta_k).

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{solve_spd_ridge, Cholesky};

/// Elementwise soft-thresholding `S(x, t) = sign(x) max(|x| - t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn soft_threshold_norm(v: &[f64], t: f64) -> f64 {
    v.iter()
        .map(|x| {
            let s = soft_threshold(*x, t);
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

/// Zero-block screen: `(beta_k, theta_k) = (0, 0)` is stationary iff
/// `|gx| <= lam1` and `|S(gw, lam2)|_2 <= lam1 + sqrt(lam1^2 - gx^2)`.
///
/// The second bound is the exact subgradient-feasibility radius; at `gx = 0`
/// it reduces to the familiar `2 lam1`.
pub(crate) fn screen_block_zero(gx: f64, gw: &[f64], lam1: f64, lam2: f64) -> bool {
    if gx.abs() > lam1 {
        return false;
    }
    let slack = (lam1 * lam1 - gx * gx).max(0.0).sqrt();
    soft_threshold_norm(gw, lam2) <= lam1 + slack
}

/// Candidate main-effect-only solution for block k given the block-excluded
/// adjusted residual dot products. Returns `Some(beta_k)` when
/// `(beta_k, 0)` is stationary.
pub(crate) fn solve_beta_only(
    gx: f64,
    gw_minus_beta: impl FnOnce(f64) -> Vec<f64>,
    sxx_over_n: f64,
    lam1: f64,
    lam2: f64,
) -> Option<f64> {
    if sxx_over_n <= 0.0 {
        return None;
    }
    let beta = soft_threshold(gx, lam1) / sxx_over_n;
    let gw2 = gw_minus_beta(beta);
    if soft_threshold_norm(&gw2, lam2) <= lam1 {
        Some(beta)
    } else {
        None
    }
}

/// Proximal operator of
/// `t [ lam1 (|(b, th)|_2 + |th|_2) + lam2 |th|_1 ]`
/// applied to the gradient-step point `(b, th)`.
pub(crate) fn prox_pliable(b: f64, th: &mut [f64], t: f64, lam1: f64, lam2: f64) -> f64 {
    for v in th.iter_mut() {
        *v = soft_threshold(*v, t * lam2);
    }
    let th_norm = th.iter().map(|v| v * v).sum::<f64>().sqrt();
    if th_norm > 0.0 {
        let scale = (1.0 - t * lam1 / th_norm).max(0.0);
        for v in th.iter_mut() {
            *v *= scale;
        }
    }
    let joint_norm = (b * b + th.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if joint_norm > 0.0 {
        let scale = (1.0 - t * lam1 / joint_norm).max(0.0);
        for v in th.iter_mut() {
            *v *= scale;
        }
        b * scale
    } else {
        0.0
    }
}

/// Unpenalized weighted least squares of a partial residual on `Z`:
/// `theta0 = (Z' W Z)^{-1} Z' W r`.
pub fn update_theta0(
    z: &Array2<f64>,
    weights: &Array1<f64>,
    partial_residual: &Array1<f64>,
) -> Result<Array1<f64>> {
    let nz = z.ncols();
    if nz == 0 {
        return Ok(Array1::zeros(0));
    }
    let mut gram = Array2::<f64>::zeros((nz, nz));
    let mut rhs = Array1::<f64>::zeros(nz);
    for r in 0..z.nrows() {
        let w = weights[r];
        if w == 0.0 {
            continue;
        }
        for a in 0..nz {
            let za = z[[r, a]];
            rhs[a] += w * za * partial_residual[r];
            for b in 0..=a {
                gram[[a, b]] += w * za * z[[r, b]];
            }
        }
    }
    for a in 0..nz {
        for b in 0..a {
            gram[[b, a]] = gram[[a, b]];
        }
    }
    solve_spd_ridge(&gram, &rhs)
}

/// One stacked penalized WLS problem. `x` is N x p, `w_int` is N x (p*q)
/// with block k in columns `k*q..(k+1)*q`, `z` optional unpenalized
/// modifiers, `groups` optional per-row group ids for unpenalized
/// intercepts. `n_norm` is the loss normalizer (the source sample size, not
/// the stacked row count).
pub(crate) struct WlsProblem<'a> {
    pub x: &'a Array2<f64>,
    pub w_int: &'a Array2<f64>,
    pub q: usize,
    pub z: Option<&'a Array2<f64>>,
    pub groups: Option<(&'a [usize], usize)>,
    pub weights: &'a Array1<f64>,
    pub response: &'a Array1<f64>,
    pub n_norm: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct CdState {
    pub theta0: Array1<f64>,
    pub intercepts: Array1<f64>,
    pub beta: Array1<f64>,
    pub theta: Array2<f64>,
}

impl CdState {
    pub fn zeros(p: usize, q: usize, nz: usize, n_groups: usize) -> Self {
        Self {
            theta0: Array1::zeros(nz),
            intercepts: Array1::zeros(n_groups),
            beta: Array1::zeros(p),
            theta: Array2::zeros((p, q)),
        }
    }

    pub fn block_is_zero(&self, k: usize) -> bool {
        self.beta[k] == 0.0 && self.theta.row(k).iter().all(|v| *v == 0.0)
    }
}

pub(crate) struct CdControl {
    pub lambda: f64,
    pub alpha: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub prox_step: f64,
    pub max_prox_iter: usize,
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CdInfo {
    pub sweeps: usize,
    pub converged: bool,
    pub step_underflows: usize,
}

struct Scratch {
    resk: Array1<f64>,
    gw: Vec<f64>,
    theta_new: Vec<f64>,
}

pub(crate) fn solve_wls(prob: &WlsProblem, ctrl: &CdControl, st: &mut CdState) -> Result<CdInfo> {
    let n_rows = prob.x.nrows();
    let p = prob.x.ncols();
    let q = prob.q;
    debug_assert_eq!(prob.w_int.ncols(), p * q);
    let lam1 = (1.0 - ctrl.alpha) * ctrl.lambda;
    let lam2 = ctrl.alpha * ctrl.lambda;
    let n = prob.n_norm;

    // residual = response - eta(state)
    let mut res = prob.response.clone();
    if let Some(z) = prob.z {
        for l in 0..z.ncols() {
            if st.theta0[l] != 0.0 {
                res.scaled_add(-st.theta0[l], &z.column(l));
            }
        }
    }
    if let Some((ids, _)) = prob.groups {
        for r in 0..n_rows {
            res[r] -= st.intercepts[ids[r]];
        }
    }
    for k in 0..p {
        if st.beta[k] != 0.0 {
            res.scaled_add(-st.beta[k], &prob.x.column(k));
        }
        for l in 0..q {
            let t = st.theta[[k, l]];
            if t != 0.0 {
                res.scaled_add(-t, &prob.w_int.column(k * q + l));
            }
        }
    }

    // per-block curvature sums and a safe initial prox step 1/L with
    // L bounded by the weighted trace
    let mut sxx = vec![0.0f64; p];
    let mut trace = vec![0.0f64; p];
    for k in 0..p {
        let xk = prob.x.column(k);
        let mut s = 0.0;
        for r in 0..n_rows {
            s += prob.weights[r] * xk[r] * xk[r];
        }
        sxx[k] = s;
        let mut tr = s;
        for l in 0..q {
            let wc = prob.w_int.column(k * q + l);
            for r in 0..n_rows {
                tr += prob.weights[r] * wc[r] * wc[r];
            }
        }
        trace[k] = tr;
    }
    let t_init: Vec<f64> = trace
        .iter()
        .map(|tr| if *tr > 0.0 { n / tr } else { ctrl.prox_step })
        .collect();

    // cached Cholesky of the modifier Gram (weights are fixed per solve)
    let gram_chol = match prob.z {
        Some(z) if z.ncols() > 0 => {
            let nz = z.ncols();
            let mut gram = Array2::<f64>::zeros((nz, nz));
            for r in 0..n_rows {
                let w = prob.weights[r];
                if w == 0.0 {
                    continue;
                }
                for a in 0..nz {
                    for b in 0..=a {
                        gram[[a, b]] += w * z[[r, a]] * z[[r, b]];
                    }
                }
            }
            for a in 0..nz {
                for b in 0..a {
                    gram[[b, a]] = gram[[a, b]];
                }
            }
            match Cholesky::new(&gram) {
                Some(c) => Some(c),
                None => {
                    let tr: f64 = (0..nz).map(|i| gram[[i, i]]).sum();
                    let ridge = 1e-8 * tr.max(1.0) / nz as f64;
                    for i in 0..nz {
                        gram[[i, i]] += ridge;
                    }
                    Some(Cholesky::new(&gram).ok_or(Error::SingularGram)?)
                }
            }
        }
        _ => None,
    };

    let group_wsum: Option<Vec<f64>> = prob.groups.map(|(ids, ng)| {
        let mut s = vec![0.0f64; ng];
        for r in 0..n_rows {
            s[ids[r]] += prob.weights[r];
        }
        s
    });

    let mut scratch = Scratch {
        resk: Array1::zeros(n_rows),
        gw: vec![0.0; q],
        theta_new: vec![0.0; q],
    };

    let mut info = CdInfo::default();
    let mut sweeps = 0usize;
    loop {
        // full sweep
        let delta = sweep(
            prob,
            ctrl,
            st,
            &mut scratch,
            &sxx,
            &t_init,
            lam1,
            lam2,
            n,
            &mut res,
            gram_chol.as_ref(),
            group_wsum.as_deref(),
            None,
            &mut info,
        )?;
        sweeps += 1;
        let active: Vec<usize> = (0..p).filter(|&k| !st.block_is_zero(k)).collect();
        if delta < ctrl.tol || sweeps >= ctrl.max_sweeps {
            info.converged = delta < ctrl.tol;
            break;
        }
        // cycle the active set until stable, then re-check with a full sweep
        loop {
            let d = sweep(
                prob,
                ctrl,
                st,
                &mut scratch,
                &sxx,
                &t_init,
                lam1,
                lam2,
                n,
                &mut res,
                gram_chol.as_ref(),
                group_wsum.as_deref(),
                Some(&active),
                &mut info,
            )?;
            sweeps += 1;
            if d < ctrl.tol || sweeps >= ctrl.max_sweeps {
                break;
            }
        }
        if sweeps >= ctrl.max_sweeps {
            break;
        }
    }
    info.sweeps = sweeps;
    Ok(info)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    prob: &WlsProblem,
    ctrl: &CdControl,
    st: &mut CdState,
    scratch: &mut Scratch,
    sxx: &[f64],
    t_init: &[f64],
    lam1: f64,
    lam2: f64,
    n: f64,
    res: &mut Array1<f64>,
    gram_chol: Option<&Cholesky>,
    group_wsum: Option<&[f64]>,
    subset: Option<&[usize]>,
    info: &mut CdInfo,
) -> Result<f64> {
    let n_rows = prob.x.nrows();
    let mut delta = 0.0f64;

    if let (Some(z), Some(chol)) = (prob.z, gram_chol) {
        let nz = z.ncols();
        if nz > 0 {
            // partial residual excluding the Z contribution
            for l in 0..nz {
                if st.theta0[l] != 0.0 {
                    res.scaled_add(st.theta0[l], &z.column(l));
                }
            }
            let mut rhs = Array1::<f64>::zeros(nz);
            for r in 0..n_rows {
                let wr = prob.weights[r] * res[r];
                if wr != 0.0 {
                    for a in 0..nz {
                        rhs[a] += wr * z[[r, a]];
                    }
                }
            }
            let new = chol.solve(&rhs);
            for l in 0..nz {
                delta = delta.max((new[l] - st.theta0[l]).abs());
                if new[l] != 0.0 {
                    res.scaled_add(-new[l], &z.column(l));
                }
            }
            st.theta0 = new;
        }
    }

    if let (Some((ids, ng)), Some(wsum)) = (prob.groups, group_wsum) {
        let mut num = vec![0.0f64; ng];
        for r in 0..n_rows {
            num[ids[r]] += prob.weights[r] * res[r];
        }
        let mut shift = vec![0.0f64; ng];
        for g in 0..ng {
            if wsum[g] > 0.0 {
                shift[g] = num[g] / wsum[g];
                st.intercepts[g] += shift[g];
                delta = delta.max(shift[g].abs());
            }
        }
        for r in 0..n_rows {
            res[r] -= shift[ids[r]];
        }
    }

    let blocks: Box<dyn Iterator<Item = usize>> = match subset {
        Some(s) => Box::new(s.iter().copied()),
        None => Box::new(0..prob.x.ncols()),
    };
    for k in blocks {
        let d = update_block(
            prob, ctrl, st, scratch, sxx, t_init, lam1, lam2, n, res, k, info,
        )?;
        delta = delta.max(d);
    }
    Ok(delta)
}

#[allow(clippy::too_many_arguments)]
fn update_block(
    prob: &WlsProblem,
    ctrl: &CdControl,
    st: &mut CdState,
    scratch: &mut Scratch,
    sxx: &[f64],
    t_init: &[f64],
    lam1: f64,
    lam2: f64,
    n: f64,
    res: &mut Array1<f64>,
    k: usize,
    info: &mut CdInfo,
) -> Result<f64> {
    let n_rows = prob.x.nrows();
    let q = prob.q;
    let xk = prob.x.column(k);
    let beta_old = st.beta[k];

    // residual with block k's contribution added back
    scratch.resk.assign(res);
    if beta_old != 0.0 {
        scratch.resk.scaled_add(beta_old, &xk);
    }
    for l in 0..q {
        let t = st.theta[[k, l]];
        if t != 0.0 {
            scratch.resk.scaled_add(t, &prob.w_int.column(k * q + l));
        }
    }

    let mut gx = 0.0;
    for r in 0..n_rows {
        gx += prob.weights[r] * xk[r] * scratch.resk[r];
    }
    gx /= n;
    for l in 0..q {
        let wc = prob.w_int.column(k * q + l);
        let mut s = 0.0;
        for r in 0..n_rows {
            s += prob.weights[r] * wc[r] * scratch.resk[r];
        }
        scratch.gw[l] = s / n;
    }

    let (beta_new, theta_changed) = if screen_block_zero(gx, &scratch.gw, lam1, lam2) {
        for l in 0..q {
            scratch.theta_new[l] = 0.0;
        }
        (0.0, ())
    } else {
        let gw = scratch.gw.clone();
        let beta_only = solve_beta_only(
            gx,
            |b| {
                let mut out = gw.clone();
                if b != 0.0 {
                    for (l, o) in out.iter_mut().enumerate() {
                        let wc = prob.w_int.column(k * q + l);
                        let mut s = 0.0;
                        for r in 0..n_rows {
                            s += prob.weights[r] * wc[r] * xk[r];
                        }
                        *o -= s * b / n;
                    }
                }
                out
            },
            sxx[k] / n,
            lam1,
            lam2,
        );
        match beta_only {
            Some(b) => {
                for l in 0..q {
                    scratch.theta_new[l] = 0.0;
                }
                (b, ())
            }
            None => {
                // joint proximal-gradient iterations on the block objective
                match prox_block_solve(prob, ctrl, scratch, t_init[k], lam1, lam2, n, k, st) {
                    Ok(b) => (b, ()),
                    Err(Error::StepUnderflow(_)) => {
                        info.step_underflows += 1;
                        // keep the block as it was
                        st.theta.row(k).iter().enumerate().for_each(|(l, v)| {
                            scratch.theta_new[l] = *v;
                        });
                        (beta_old, ())
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let _ = theta_changed;

    // apply: res = resk - contribution of the new block values
    let mut change = (beta_new - beta_old).abs();
    res.assign(&scratch.resk);
    if beta_new != 0.0 {
        res.scaled_add(-beta_new, &xk);
    }
    st.beta[k] = beta_new;
    for l in 0..q {
        let t_new = scratch.theta_new[l];
        change = change.max((t_new - st.theta[[k, l]]).abs());
        st.theta[[k, l]] = t_new;
        if t_new != 0.0 {
            res.scaled_add(-t_new, &prob.w_int.column(k * q + l));
        }
    }
    Ok(change)
}

/// Iterated backtracked proximal-gradient steps on block k's objective.
/// Writes theta into `scratch.theta_new` and returns the new beta.
#[allow(clippy::too_many_arguments)]
fn prox_block_solve(
    prob: &WlsProblem,
    ctrl: &CdControl,
    scratch: &mut Scratch,
    t0: f64,
    lam1: f64,
    lam2: f64,
    n: f64,
    k: usize,
    st: &CdState,
) -> Result<f64> {
    let n_rows = prob.x.nrows();
    let q = prob.q;
    let xk = prob.x.column(k);

    let mut beta = st.beta[k];
    let mut theta: Vec<f64> = st.theta.row(k).to_vec();

    // u = resk - x beta - W theta
    let eval = |beta: f64, theta: &[f64], u: &mut Array1<f64>| -> f64 {
        u.assign(&scratch.resk);
        if beta != 0.0 {
            u.scaled_add(-beta, &xk);
        }
        for (l, t) in theta.iter().enumerate() {
            if *t != 0.0 {
                u.scaled_add(-*t, &prob.w_int.column(k * q + l));
            }
        }
        let mut g = 0.0;
        for r in 0..n_rows {
            g += prob.weights[r] * u[r] * u[r];
        }
        g / (2.0 * n)
    };

    let mut u = Array1::<f64>::zeros(n_rows);
    let mut g_cur = eval(beta, &theta, &mut u);
    let mut u_new = Array1::<f64>::zeros(n_rows);

    for _ in 0..ctrl.max_prox_iter {
        // gradient of the smooth part at (beta, theta)
        let mut gb = 0.0;
        for r in 0..n_rows {
            gb -= prob.weights[r] * xk[r] * u[r];
        }
        gb /= n;
        let mut gt = vec![0.0f64; q];
        for (l, g) in gt.iter_mut().enumerate() {
            let wc = prob.w_int.column(k * q + l);
            let mut s = 0.0;
            for r in 0..n_rows {
                s -= prob.weights[r] * wc[r] * u[r];
            }
            *g = s / n;
        }

        let mut t = t0.max(1e-12);
        let (bnew, tnew, gnew) = loop {
            let mut th: Vec<f64> = (0..q).map(|l| theta[l] - t * gt[l]).collect();
            let bn = prox_pliable(beta - t * gb, &mut th, t, lam1, lam2);
            let g_new = eval(bn, &th, &mut u_new);
            let db = bn - beta;
            let mut quad = db * db;
            let mut lin = gb * db;
            for l in 0..q {
                let dt = th[l] - theta[l];
                quad += dt * dt;
                lin += gt[l] * dt;
            }
            if g_new <= g_cur + lin + quad / (2.0 * t) + 1e-12 * (1.0 + g_cur.abs()) {
                break (bn, th, g_new);
            }
            t *= 0.5;
            if t < 1e-14 {
                return Err(Error::StepUnderflow(k));
            }
        };

        let mut change = (bnew - beta).abs();
        for l in 0..q {
            change = change.max((tnew[l] - theta[l]).abs());
        }
        beta = bnew;
        theta = tnew;
        g_cur = gnew;
        std::mem::swap(&mut u, &mut u_new);
        if change < 0.5 * ctrl.tol {
            break;
        }
    }
    scratch.theta_new[..q].copy_from_slice(&theta);
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(1.7, 0.0), 1.7);
        let v = [0.5, -2.0, 1.2];
        let out: Vec<f64> = v.iter().map(|x| soft_threshold(*x, 1.0)).collect();
        assert_abs_diff_eq!(out[0], 0.0);
        assert_abs_diff_eq!(out[1], -1.0);
        assert_abs_diff_eq!(out[2], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn screen_trivial_cases() {
        // zero residual: both conditions hold for any lambda > 0
        assert!(screen_block_zero(0.0, &[0.0, 0.0], 0.5, 0.5));
        // lambda = 0 with nonzero gradient
        assert!(!screen_block_zero(0.1, &[0.0], 0.0, 0.0));
    }

    #[test]
    fn theta0_univariate_wls() {
        let z = array![[1.0], [2.0], [-1.0]];
        let w = array![1.0, 1.0, 1.0];
        let r = array![2.0, 3.0, 0.5];
        let est = update_theta0(&z, &w, &r).unwrap();
        let num: f64 = 2.0 + 2.0 * 3.0 + -1.0 * 0.5;
        let den: f64 = 1.0 + 4.0 + 1.0;
        assert_abs_diff_eq!(est[0], num / den, epsilon = 1e-12);
    }

    #[test]
    fn theta0_empty_is_noop() {
        let z = Array2::<f64>::zeros((3, 0));
        let est = update_theta0(&z, &array![1.0, 1.0, 1.0], &array![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(est.len(), 0);
    }

    #[test]
    fn theta0_matches_dense_normal_equations() {
        // random-ish 10x2 Z with varying weights against a hand solve
        let z = array![
            [0.3, -1.2],
            [1.1, 0.4],
            [-0.7, 0.9],
            [0.2, -0.5],
            [1.4, 1.0],
            [-0.9, -0.8],
            [0.6, 0.1],
            [-0.2, 1.3],
            [0.8, -0.4],
            [-1.1, 0.7]
        ];
        let w = array![0.5, 1.2, 0.8, 2.0, 0.3, 1.5, 0.9, 1.1, 0.7, 1.3];
        let r = array![1.0, -0.4, 0.2, 0.9, -1.5, 0.3, 0.7, -0.2, 1.1, 0.5];
        let est = update_theta0(&z, &w, &r).unwrap();
        // dense 2x2 solve by hand
        let mut a = [[0.0f64; 2]; 2];
        let mut b = [0.0f64; 2];
        for i in 0..10 {
            for c in 0..2 {
                b[c] += w[i] * z[[i, c]] * r[i];
                for d in 0..2 {
                    a[c][d] += w[i] * z[[i, c]] * z[[i, d]];
                }
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let t0 = (b[0] * a[1][1] - b[1] * a[0][1]) / det;
        let t1 = (a[0][0] * b[1] - a[1][0] * b[0]) / det;
        assert_abs_diff_eq!(est[0], t0, epsilon = 1e-10);
        assert_abs_diff_eq!(est[1], t1, epsilon = 1e-10);
    }

    #[test]
    fn prox_identity_at_zero_penalty() {
        let mut th = vec![0.4, -0.8];
        let b = prox_pliable(1.5, &mut th, 0.7, 0.0, 0.0);
        assert_abs_diff_eq!(b, 1.5);
        assert_abs_diff_eq!(th[0], 0.4);
        assert_abs_diff_eq!(th[1], -0.8);
    }

    #[test]
    fn prox_zeroes_small_blocks() {
        let mut th = vec![0.01, -0.02];
        let b = prox_pliable(0.01, &mut th, 1.0, 1.0, 0.5);
        assert_eq!(b, 0.0);
        assert!(th.iter().all(|v| *v == 0.0));
    }
}
