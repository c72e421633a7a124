//! Blockwise coordinate descent for the pliable-lasso Cox objective.
//!
//! The outer loop refreshes the quadratic approximation of the negative
//! partial log-likelihood at the current predictor; the inner loop solves the
//! resulting penalized weighted least-squares problem by screened coordinate
//! descent. The library minimizes
//!
//! `f(theta0, beta, Theta) = -(1/n) partial_loglik + penalty`,
//!
//! and certifies convergence by the subgradient (KKT) residual.

mod cd;
mod kkt;

pub use cd::{soft_threshold, update_theta0};
pub(crate) use cd::{solve_wls, CdControl, CdState, WlsProblem};
pub(crate) use kkt::kkt_residual;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::objective::{self, working_problem};
use crate::survival::{InteractionDesign, RiskSetIndex, SurvivalDataset};

/// Linear predictors beyond this magnitude flag a diverging fit
/// (quasi-separation), matching common practice for Cox IRLS.
pub const ETA_CAP: f64 = 30.0;

/// Penalty level, mixing parameter, and solver tolerances.
#[derive(Debug, Clone)]
pub struct PenaltyConfig {
    pub lambda: f64,
    /// Mixing parameter in [0, 1]; (1 - alpha) weights the group terms,
    /// alpha the l1 term on interactions.
    pub alpha: f64,
    pub outer_max_iter: usize,
    pub inner_max_iter: usize,
    /// Outer loop: relative objective change threshold.
    pub tol_outer: f64,
    /// Inner loop: max absolute coefficient change threshold.
    pub tol_inner: f64,
    /// KKT residual certifying convergence.
    pub tol_kkt: f64,
    /// Initial proximal step for degenerate blocks (backtracked).
    pub prox_step: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            alpha: 0.5,
            outer_max_iter: 100,
            inner_max_iter: 400,
            tol_outer: 1e-5,
            tol_inner: 1e-7,
            tol_kkt: 1e-5,
            prox_step: 1.0,
        }
    }
}

impl PenaltyConfig {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        Self {
            lambda,
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig("alpha must be in [0, 1]".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig("lambda must be nonnegative".into()));
        }
        if self.tol_outer <= 0.0 || self.tol_inner <= 0.0 || self.tol_kkt <= 0.0 {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.outer_max_iter == 0 || self.inner_max_iter == 0 {
            return Err(Error::InvalidConfig(
                "iteration limits must be positive".into(),
            ));
        }
        if self.prox_step <= 0.0 {
            return Err(Error::InvalidConfig("prox_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct FitDiagnostics {
    pub outer_iterations: usize,
    pub inner_sweeps: usize,
    pub final_objective: f64,
    pub kkt_residual: f64,
    pub converged: bool,
    pub hit_max_iter: bool,
    pub diverging_eta: bool,
    pub step_underflows: usize,
    /// Objective value after each outer iteration (monotone nonincreasing up
    /// to the re-approximation slack).
    pub objective_trace: Vec<f64>,
}

/// Fitted coefficients at one penalty level.
///
/// Hierarchy invariant: a nonzero interaction row `theta_k` implies a nonzero
/// main effect `beta_k`.
#[derive(Debug, Clone)]
pub struct PliableModel {
    /// Modifier main effects (unpenalized), length nz.
    pub theta0: Array1<f64>,
    /// Covariate main effects, length p.
    pub beta: Array1<f64>,
    /// Interaction coefficients, p x nz, row k = theta_k.
    pub theta: Array2<f64>,
    pub lambda: f64,
    pub alpha: f64,
    pub diagnostics: FitDiagnostics,
}

impl PliableModel {
    pub fn zeros(p: usize, nz: usize, lambda: f64, alpha: f64) -> Self {
        Self {
            theta0: Array1::zeros(nz),
            beta: Array1::zeros(p),
            theta: Array2::zeros((p, nz)),
            lambda,
            alpha,
            diagnostics: FitDiagnostics::default(),
        }
    }

    pub fn linear_predictor(
        &self,
        z: &Array2<f64>,
        x: &Array2<f64>,
        w: &Array2<f64>,
    ) -> Array1<f64> {
        objective::linear_predictor(z, x, w, &self.theta0, &self.beta, &self.theta)
    }

    pub fn penalty_value(&self) -> f64 {
        penalty_value(&self.beta, &self.theta, self.lambda, self.alpha)
    }

    /// Number of blocks with an exactly nonzero interaction row but an
    /// exactly zero main effect.
    pub fn hierarchy_violations(&self) -> usize {
        (0..self.beta.len())
            .filter(|&k| self.beta[k] == 0.0 && self.theta.row(k).iter().any(|v| *v != 0.0))
            .count()
    }

    pub fn nonzero_beta(&self, tol: f64) -> Vec<usize> {
        (0..self.beta.len())
            .filter(|&k| self.beta[k].abs() > tol)
            .collect()
    }

    /// (k, l) pairs with |theta_kl| above tol.
    pub fn nonzero_theta(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.theta.nrows() {
            for l in 0..self.theta.ncols() {
                if self.theta[[k, l]].abs() > tol {
                    out.push((k, l));
                }
            }
        }
        out
    }
}

/// Pliable-lasso penalty value
/// `lambda [(1-alpha) sum_k (|(beta_k, theta_k)|_2 + |theta_k|_2) + alpha |Theta|_1]`.
pub fn penalty_value(beta: &Array1<f64>, theta: &Array2<f64>, lambda: f64, alpha: f64) -> f64 {
    let mut group = 0.0;
    let mut l1 = 0.0;
    for k in 0..beta.len() {
        let th_sq: f64 = theta.row(k).iter().map(|v| v * v).sum();
        group += (beta[k] * beta[k] + th_sq).sqrt() + th_sq.sqrt();
        l1 += theta.row(k).iter().map(|v| v.abs()).sum::<f64>();
    }
    lambda * ((1.0 - alpha) * group + alpha * l1)
}

/// Fit the pliable-lasso Cox model at one penalty level.
///
/// `data` is used as given: standardize upstream if penalties should act on
/// the standardized scale. `init` warm-starts the coefficients.
pub fn fit(
    data: &SurvivalDataset,
    design: &InteractionDesign,
    idx: &RiskSetIndex,
    config: &PenaltyConfig,
    init: Option<&PliableModel>,
) -> Result<PliableModel> {
    config.validate()?;
    let p = data.p();
    let nz = data.nz();
    if design.p() != p || design.nz() != nz {
        return Err(Error::DimensionMismatch(format!(
            "design blocks {}x{} vs data {}x{}",
            design.p(),
            design.nz(),
            p,
            nz
        )));
    }
    let n = data.n() as f64;
    let x = data.x();
    let z = data.z();
    let w = design.w();
    let weight = data.weight();

    let mut st = match init {
        Some(m) => CdState {
            theta0: m.theta0.clone(),
            intercepts: Array1::zeros(0),
            beta: m.beta.clone(),
            theta: m.theta.clone(),
        },
        None => CdState::zeros(p, nz, nz, 0),
    };

    let ctrl = CdControl {
        lambda: config.lambda,
        alpha: config.alpha,
        tol: config.tol_inner,
        max_sweeps: config.inner_max_iter,
        prox_step: config.prox_step,
        max_prox_iter: 100,
    };

    let objective_of = |st: &CdState, eta: &Array1<f64>| -> f64 {
        -objective::partial_loglik(eta, idx, weight) / n
            + penalty_value(&st.beta, &st.theta, config.lambda, config.alpha)
    };
    let predictor = |st: &CdState| -> Array1<f64> {
        objective::linear_predictor(z, x, w, &st.theta0, &st.beta, &st.theta)
    };

    let mut diag = FitDiagnostics::default();
    let mut eta = predictor(&st);
    let mut f_cur = objective_of(&st, &eta);
    diag.objective_trace.push(f_cur);

    for it in 1..=config.outer_max_iter {
        diag.outer_iterations = it;
        if eta.iter().any(|e| e.abs() > ETA_CAP) {
            diag.diverging_eta = true;
            break;
        }
        let quad = objective::derivatives(&eta, idx, weight);
        diag.kkt_residual = kkt_residual(
            &quad.grad,
            x,
            w,
            nz,
            if nz > 0 { Some(z) } else { None },
            None,
            &st.beta,
            &st.theta,
            config.lambda,
            config.alpha,
            n,
        );
        if diag.kkt_residual <= config.tol_kkt {
            // secondary: objective settled as well
            let len = diag.objective_trace.len();
            let settled = len < 2 || {
                let prev = diag.objective_trace[len - 2];
                (prev - f_cur).abs() <= config.tol_outer * (prev.abs() + 1e-10)
            };
            if settled || it > 1 {
                diag.converged = true;
                break;
            }
        }

        let wd = working_problem(&quad, &eta);
        let prob = WlsProblem {
            x,
            w_int: w,
            q: nz,
            z: if nz > 0 { Some(z) } else { None },
            groups: None,
            weights: &wd.weights,
            response: &wd.response,
            n_norm: n,
        };
        let st_old = st.clone();
        let f_old = f_cur;
        let cdinfo = solve_wls(&prob, &ctrl, &mut st)?;
        diag.inner_sweeps += cdinfo.sweeps;
        diag.step_underflows += cdinfo.step_underflows;

        eta = predictor(&st);
        f_cur = objective_of(&st, &eta);
        if !f_cur.is_finite() || f_cur > f_old + 1e-10 * (1.0 + f_old.abs()) {
            // the quadratic model overshot: damp toward the previous iterate
            let mut s = 0.5;
            let mut accepted = false;
            while s >= 1e-4 {
                let st_try = blend(&st_old, &st, s);
                let eta_try = predictor(&st_try);
                let f_try = objective_of(&st_try, &eta_try);
                if f_try.is_finite() && f_try <= f_old + 1e-10 * (1.0 + f_old.abs()) {
                    st = st_try;
                    eta = eta_try;
                    f_cur = f_try;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if !accepted {
                st = st_old;
                eta = predictor(&st);
                f_cur = f_old;
                diag.objective_trace.push(f_cur);
                break;
            }
        }
        diag.objective_trace.push(f_cur);
    }

    if !diag.converged && !diag.diverging_eta {
        diag.hit_max_iter = diag.outer_iterations >= config.outer_max_iter;
        // refresh the certificate at the accepted state
        let quad = objective::derivatives(&eta, idx, weight);
        diag.kkt_residual = kkt_residual(
            &quad.grad,
            x,
            w,
            nz,
            if nz > 0 { Some(z) } else { None },
            None,
            &st.beta,
            &st.theta,
            config.lambda,
            config.alpha,
            n,
        );
        if diag.kkt_residual <= config.tol_kkt {
            diag.converged = true;
            diag.hit_max_iter = false;
        }
    }
    diag.final_objective = f_cur;

    Ok(PliableModel {
        theta0: st.theta0,
        beta: st.beta,
        theta: st.theta,
        lambda: config.lambda,
        alpha: config.alpha,
        diagnostics: diag,
    })
}

fn blend(a: &CdState, b: &CdState, s: f64) -> CdState {
    CdState {
        theta0: &a.theta0 * (1.0 - s) + &b.theta0 * s,
        intercepts: &a.intercepts * (1.0 - s) + &b.intercepts * s,
        beta: &a.beta * (1.0 - s) + &b.beta * s,
        theta: &a.theta * (1.0 - s) + &b.theta * s,
    }
}

/// KKT residual of a fitted model against fresh derivatives, on the same
/// (standardized) data it was fitted to.
pub fn model_kkt_residual(
    model: &PliableModel,
    data: &SurvivalDataset,
    design: &InteractionDesign,
    idx: &RiskSetIndex,
) -> f64 {
    let eta = model.linear_predictor(data.z(), data.x(), design.w());
    let quad = objective::derivatives(&eta, idx, data.weight());
    kkt_residual(
        &quad.grad,
        data.x(),
        design.w(),
        data.nz(),
        if data.nz() > 0 { Some(data.z()) } else { None },
        None,
        &model.beta,
        &model.theta,
        model.lambda,
        model.alpha,
        data.n() as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton;
    use crate::survival::{build_interactions, validate_and_index};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_dataset(
        n: usize,
        p: usize,
        nz: usize,
        seed: u64,
        effects: &[(usize, f64)],
    ) -> SurvivalDataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| {
            rand_distr::StandardNormal.sample(&mut rng)
        });
        let z = Array2::from_shape_fn((n, nz), |_| if rng.random::<f64>() < 0.5 { 0.0 } else { 1.0 });
        let mut time = Array1::zeros(n);
        let mut status = Array1::zeros(n);
        for i in 0..n {
            let mut v = 0.0f64;
            for (k, b) in effects {
                v += x[[i, *k]] * b;
            }
            let e: f64 = rng.random::<f64>();
            let y = -e.ln() * (-v).exp();
            let c = -rng.random::<f64>().ln();
            time[i] = y.min(c).max(1e-6);
            status[i] = u8::from(y <= c);
        }
        if (0..n).all(|i| status[i] == 0) {
            status[0] = 1;
        }
        SurvivalDataset::new(time, status, None, x, Some(z)).unwrap()
    }

    #[test]
    fn huge_lambda_gives_null_model_with_newton_theta0() {
        let ds = random_dataset(60, 3, 2, 7, &[(0, 1.0), (1, -0.5)]);
        let idx = validate_and_index(&ds).unwrap();
        let design = build_interactions(ds.x(), ds.z()).unwrap();
        let mut cfg = PenaltyConfig::new(1e9, 0.5);
        cfg.tol_kkt = 1e-9;
        let model = fit(&ds, &design, &idx, &cfg, None).unwrap();
        assert!(model.beta.iter().all(|b| *b == 0.0));
        assert!(model.theta.iter().all(|t| *t == 0.0));
        // theta0 equals the unpenalized modifier-only Cox fit
        let nf = newton::fit_cox(ds.z(), &idx, ds.weight(), 1e-10, 100).unwrap();
        for l in 0..2 {
            assert_abs_diff_eq!(model.theta0[l], nf.beta[l], epsilon = 1e-5);
        }
    }

    #[test]
    fn unpenalized_matches_newton_oracle() {
        let ds = random_dataset(30, 2, 0, 11, &[(0, 0.8), (1, -0.6)]);
        let idx = validate_and_index(&ds).unwrap();
        let design = build_interactions(ds.x(), ds.z()).unwrap();
        let cfg = PenaltyConfig::new(0.0, 0.5);
        let model = fit(&ds, &design, &idx, &cfg, None).unwrap();
        let nf = newton::fit_cox(ds.x(), &idx, ds.weight(), 1e-10, 100).unwrap();
        for k in 0..2 {
            assert!(
                (model.beta[k] - nf.beta[k]).abs() < 1e-4,
                "beta[{k}] {} vs {}",
                model.beta[k],
                nf.beta[k]
            );
        }
    }

    #[test]
    fn outer_descent_is_monotone() {
        let ds = random_dataset(50, 4, 2, 3, &[(0, 1.0), (2, -1.0)]);
        let idx = validate_and_index(&ds).unwrap();
        let design = build_interactions(ds.x(), ds.z()).unwrap();
        let cfg = PenaltyConfig::new(0.05, 0.5);
        let model = fit(&ds, &design, &idx, &cfg, None).unwrap();
        let tr = &model.diagnostics.objective_trace;
        for w in tr.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "objective increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn hierarchy_and_kkt_on_random_fits() {
        for seed in [1u64, 2, 3] {
            let ds = random_dataset(80, 5, 3, seed, &[(0, 1.2), (1, -0.8)]);
            let idx = validate_and_index(&ds).unwrap();
            let (std, _) = crate::survival::standardize(&ds).unwrap();
            let design = build_interactions(std.x(), std.z()).unwrap();
            for lambda in [0.3, 0.1, 0.02] {
                let cfg = PenaltyConfig::new(lambda, 0.5);
                let model = fit(&std, &design, &idx, &cfg, None).unwrap();
                assert_eq!(model.hierarchy_violations(), 0);
                let kkt = model_kkt_residual(&model, &std, &design, &idx);
                assert!(kkt <= 1e-4, "kkt {kkt} at lambda {lambda}");
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        let ds = random_dataset(40, 3, 2, 21, &[(0, 1.0), (1, 0.7)]);
        let idx = validate_and_index(&ds).unwrap();
        let (std, _) = crate::survival::standardize(&ds).unwrap();
        let design = build_interactions(std.x(), std.z()).unwrap();
        let cfg = PenaltyConfig::new(0.08, 0.5);
        let m1 = fit(&std, &design, &idx, &cfg, None).unwrap();

        // permute feature order 0,1,2 -> 2,0,1
        let perm = [2usize, 0, 1];
        let xp = {
            let mut xp = std.x().clone();
            for (new_k, &old_k) in perm.iter().enumerate() {
                xp.column_mut(new_k).assign(&std.x().column(old_k));
            }
            xp
        };
        let dsp = std.with_x(xp).unwrap();
        let designp = build_interactions(dsp.x(), dsp.z()).unwrap();
        let m2 = fit(&dsp, &designp, &idx, &cfg, None).unwrap();
        for (new_k, &old_k) in perm.iter().enumerate() {
            assert_abs_diff_eq!(m2.beta[new_k], m1.beta[old_k], epsilon = 1e-5);
            for l in 0..2 {
                assert_abs_diff_eq!(m2.theta[[new_k, l]], m1.theta[[old_k, l]], epsilon = 1e-5);
            }
        }
    }

    /// Direct evaluation of one block's objective, independent of the CD
    /// implementation; minimized by iterative grid refinement.
    pub(super) fn block_objective(
        resk: &Array1<f64>,
        weights: &Array1<f64>,
        xk: &Array1<f64>,
        wk: &Array2<f64>,
        n: f64,
        lam1: f64,
        lam2: f64,
        beta: f64,
        theta: &[f64],
    ) -> f64 {
        let mut loss = 0.0;
        for r in 0..resk.len() {
            let mut u = resk[r] - xk[r] * beta;
            for (l, t) in theta.iter().enumerate() {
                u -= wk[[r, l]] * *t;
            }
            loss += weights[r] * u * u;
        }
        let th_sq: f64 = theta.iter().map(|t| t * t).sum();
        loss / (2.0 * n)
            + lam1 * ((beta * beta + th_sq).sqrt() + th_sq.sqrt())
            + lam2 * theta.iter().map(|t| t.abs()).sum::<f64>()
    }

    pub(super) fn grid_minimize_block(
        resk: &Array1<f64>,
        weights: &Array1<f64>,
        xk: &Array1<f64>,
        wk: &Array2<f64>,
        n: f64,
        lam1: f64,
        lam2: f64,
        radius: f64,
        levels: usize,
    ) -> (Vec<f64>, f64) {
        let dims = 1 + wk.ncols();
        assert!(dims <= 3, "grid oracle limited to 3 dimensions");
        let mut center = vec![0.0f64; dims];
        let mut r = radius;
        let steps = 13i64;
        let mut best_val = f64::INFINITY;
        for _ in 0..levels {
            let mut best = center.clone();
            best_val = f64::INFINITY;
            let mut point = vec![0.0f64; dims];
            let total = (steps as usize).pow(dims as u32);
            for flat in 0..total {
                let mut rem = flat;
                for (d, pt) in point.iter_mut().enumerate() {
                    let i = (rem % steps as usize) as i64;
                    rem /= steps as usize;
                    *pt = center[d] + (i - steps / 2) as f64 * (2.0 * r / (steps - 1) as f64);
                }
                let val = block_objective(
                    resk, weights, xk, wk, n, lam1, lam2, point[0], &point[1..],
                );
                if val < best_val {
                    best_val = val;
                    best.copy_from_slice(&point);
                }
            }
            center = best;
            r *= 0.35;
        }
        (center, best_val)
    }

    #[test]
    fn prox_fixed_point_matches_grid_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..5 {
            let n_rows = 15;
            let q = 2;
            let resk = Array1::from_shape_fn(n_rows, |_| rng.random::<f64>() * 2.0 - 1.0);
            let weights = Array1::from_shape_fn(n_rows, |_| 0.2 + rng.random::<f64>());
            let xk = Array1::from_shape_fn(n_rows, |_| rng.random::<f64>() * 2.0 - 1.0);
            let wk = Array2::from_shape_fn((n_rows, q), |_| rng.random::<f64>() * 2.0 - 1.0);
            let n = n_rows as f64;
            let (lam1, lam2) = (0.05, 0.03);

            // iterate prox steps to convergence using the production operator
            let mut beta = 0.0f64;
            let mut theta = vec![0.0f64; q];
            let mut t = 0.5;
            for _ in 0..20000 {
                let mut gb = 0.0;
                let mut gt = vec![0.0f64; q];
                for r in 0..n_rows {
                    let mut u = resk[r] - xk[r] * beta;
                    for l in 0..q {
                        u -= wk[[r, l]] * theta[l];
                    }
                    gb -= weights[r] * xk[r] * u;
                    for l in 0..q {
                        gt[l] -= weights[r] * wk[[r, l]] * u;
                    }
                }
                gb /= n;
                for g in gt.iter_mut() {
                    *g /= n;
                }
                let f_cur = block_objective(&resk, &weights, &xk, &wk, n, lam1, lam2, beta, &theta);
                loop {
                    let mut th_new: Vec<f64> =
                        (0..q).map(|l| theta[l] - t * gt[l]).collect();
                    let b_new = cd::prox_pliable(beta - t * gb, &mut th_new, t, lam1, lam2);
                    let f_new =
                        block_objective(&resk, &weights, &xk, &wk, n, lam1, lam2, b_new, &th_new);
                    if f_new <= f_cur + 1e-14 {
                        beta = b_new;
                        theta = th_new;
                        break;
                    }
                    t *= 0.5;
                    assert!(t > 1e-14);
                }
            }
            let f_prox = block_objective(&resk, &weights, &xk, &wk, n, lam1, lam2, beta, &theta);
            let (_, f_grid) =
                grid_minimize_block(&resk, &weights, &xk, &wk, n, lam1, lam2, 3.0, 10);
            assert!(
                f_prox <= f_grid + 1e-4,
                "prox value {f_prox} worse than grid {f_grid}"
            );
        }
    }

    #[test]
    fn screens_agree_with_grid_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut fired = 0;
        for _ in 0..40 {
            let n_rows = 20;
            let q = 2;
            let resk = Array1::from_shape_fn(n_rows, |_| rng.random::<f64>() * 1.4 - 0.7);
            let weights = Array1::from_shape_fn(n_rows, |_| 0.2 + rng.random::<f64>());
            let xk = Array1::from_shape_fn(n_rows, |_| rng.random::<f64>() * 2.0 - 1.0);
            let wk = Array2::from_shape_fn((n_rows, q), |_| rng.random::<f64>() * 2.0 - 1.0);
            let n = n_rows as f64;
            let lambda = 0.02 + rng.random::<f64>() * 0.2;
            let alpha = 0.5;
            let (lam1, lam2) = ((1.0 - alpha) * lambda, alpha * lambda);

            let mut gx = 0.0;
            let mut gw = vec![0.0f64; q];
            for r in 0..n_rows {
                gx += weights[r] * xk[r] * resk[r];
                for l in 0..q {
                    gw[l] += weights[r] * wk[[r, l]] * resk[r];
                }
            }
            gx /= n;
            for g in gw.iter_mut() {
                *g /= n;
            }
            if cd::screen_block_zero(gx, &gw, lam1, lam2) {
                fired += 1;
                let (gamma, _) =
                    grid_minimize_block(&resk, &weights, &xk, &wk, n, lam1, lam2, 2.0, 10);
                for v in gamma {
                    assert!(v.abs() < 1e-5, "screen fired but oracle found {v}");
                }
            }
        }
        assert!(fired > 0, "no screen fired; test vacuous");
    }
}
