//! Survival data model: validation, time ordering, risk sets and tie groups.
//!
//! Every likelihood computation in the crate goes through [`RiskSetIndex`].
//! Risk sets are nested (`R_1 ⊇ R_2 ⊇ …`), so they are stored as suffix
//! ranges of the time-sorted order rather than explicit sets, and the set of
//! failure times at which an observation is at risk becomes a prefix range.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::argsort;

/// Right-censored survival data with covariates `X` and modifiers `Z`.
///
/// A failure and a censoring recorded at the same time are both kept in the
/// risk set at that time (the censored observation is treated as leaving just
/// after it).
#[derive(Debug, Clone)]
pub struct SurvivalDataset {
    time: Array1<f64>,
    status: Array1<u8>,
    weight: Array1<f64>,
    x: Array2<f64>,
    z: Array2<f64>,
}

impl SurvivalDataset {
    /// Build and validate a dataset. `weight` defaults to 1 for every
    /// observation and `z` to an `n x 0` matrix.
    pub fn new(
        time: Array1<f64>,
        status: Array1<u8>,
        weight: Option<Array1<f64>>,
        x: Array2<f64>,
        z: Option<Array2<f64>>,
    ) -> Result<Self> {
        let n = time.len();
        let weight = weight.unwrap_or_else(|| Array1::ones(n));
        let z = z.unwrap_or_else(|| Array2::zeros((n, 0)));
        let ds = Self {
            time,
            status,
            weight,
            x,
            z,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let n = self.time.len();
        if self.status.len() != n
            || self.weight.len() != n
            || self.x.nrows() != n
            || self.z.nrows() != n
        {
            return Err(Error::DimensionMismatch(format!(
                "time={} status={} weight={} X rows={} Z rows={}",
                n,
                self.status.len(),
                self.weight.len(),
                self.x.nrows(),
                self.z.nrows()
            )));
        }
        if self.time.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::NonFinite("time"));
        }
        if self.status.iter().any(|s| *s > 1) {
            return Err(Error::InvalidStatus);
        }
        if self.weight.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::NegativeWeight);
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("X"));
        }
        if self.z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Z"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.time.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn nz(&self) -> usize {
        self.z.ncols()
    }

    pub fn time(&self) -> &Array1<f64> {
        &self.time
    }

    pub fn status(&self) -> &Array1<u8> {
        &self.status
    }

    pub fn weight(&self) -> &Array1<f64> {
        &self.weight
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn z(&self) -> &Array2<f64> {
        &self.z
    }

    pub fn n_failures(&self) -> usize {
        self.status.iter().filter(|s| **s == 1).count()
    }

    /// Subset of rows, in the given order. Used for CV folds and test splits.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let take1 = |a: &Array1<f64>| Array1::from_iter(rows.iter().map(|&r| a[r]));
        let x = take_rows(&self.x, rows);
        let z = take_rows(&self.z, rows);
        Self {
            time: take1(&self.time),
            status: Array1::from_iter(rows.iter().map(|&r| self.status[r])),
            weight: take1(&self.weight),
            x,
            z,
        }
    }

    /// Replace covariates, keeping times/status/weights. The new matrix must
    /// have the same number of rows.
    pub fn with_x(&self, x: Array2<f64>) -> Result<Self> {
        Self::new(
            self.time.clone(),
            self.status.clone(),
            Some(self.weight.clone()),
            x,
            Some(self.z.clone()),
        )
    }

    pub fn with_z(&self, z: Array2<f64>) -> Result<Self> {
        Self::new(
            self.time.clone(),
            self.status.clone(),
            Some(self.weight.clone()),
            self.x.clone(),
            Some(z),
        )
    }
}

/// Copy selected rows into a new column-major matrix.
pub(crate) fn take_rows(a: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), a.ncols()).f());
    for (i, &r) in rows.iter().enumerate() {
        for c in 0..a.ncols() {
            out[[i, c]] = a[[r, c]];
        }
    }
    out
}

use ndarray::ShapeBuilder;

/// Precomputed failure-time ordering, risk sets, and Breslow tie groups.
#[derive(Debug, Clone)]
pub struct RiskSetIndex {
    /// Ranks -> original index, times ascending (ties by original index).
    order: Vec<usize>,
    /// The m distinct failure times, ascending.
    failure_times: Vec<f64>,
    /// `R_i = order[risk_start[i]..]`.
    risk_start: Vec<usize>,
    /// `D_i`: original indices failing at failure time i.
    tied_failures: Vec<Vec<usize>>,
    /// `d_i`: sum of weights over `D_i`.
    tied_weight: Vec<f64>,
    /// Per original index j: `C_j = 0..n_risk_times[j]`.
    n_risk_times: Vec<usize>,
}

impl RiskSetIndex {
    pub fn m(&self) -> usize {
        self.failure_times.len()
    }

    pub fn failure_times(&self) -> &[f64] {
        &self.failure_times
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Risk set at failure time i, as a slice of original indices.
    pub fn risk_set(&self, i: usize) -> &[usize] {
        &self.order[self.risk_start[i]..]
    }

    pub fn risk_start(&self) -> &[usize] {
        &self.risk_start
    }

    pub fn failures_at(&self, i: usize) -> &[usize] {
        &self.tied_failures[i]
    }

    pub fn tied_weight(&self, i: usize) -> f64 {
        self.tied_weight[i]
    }

    /// Failing index `j(i)` when the failure is untied.
    pub fn jof(&self, i: usize) -> Option<usize> {
        if self.tied_failures[i].len() == 1 {
            Some(self.tied_failures[i][0])
        } else {
            None
        }
    }

    /// Number of failure times at which observation j is at risk; `C_j` is
    /// the prefix range `0..n_risk_times(j)`.
    pub fn n_risk_times(&self, j: usize) -> usize {
        self.n_risk_times[j]
    }

    pub fn at_risk(&self, i: usize, j: usize) -> bool {
        i < self.n_risk_times[j]
    }
}

/// Validate a dataset and build its risk-set index. Tied failure times are
/// grouped Breslow-style into a single `D_i` with weight sum `d_i`.
pub fn validate_and_index(data: &SurvivalDataset) -> Result<RiskSetIndex> {
    data.validate()?;
    if data.n_failures() == 0 {
        return Err(Error::NoFailures);
    }
    let n = data.n();
    let times = data.time();
    let order = argsort(times.as_slice().expect("contiguous times"));

    let mut failure_times: Vec<f64> = Vec::new();
    let mut tied_failures: Vec<Vec<usize>> = Vec::new();
    let mut tied_weight: Vec<f64> = Vec::new();
    for &j in &order {
        if data.status()[j] == 1 {
            let t = times[j];
            if failure_times.last() != Some(&t) {
                failure_times.push(t);
                tied_failures.push(Vec::new());
                tied_weight.push(0.0);
            }
            tied_failures.last_mut().unwrap().push(j);
            *tied_weight.last_mut().unwrap() += data.weight()[j];
        }
    }

    // R_i is the suffix of the sorted order whose times are >= t_i.
    let sorted_times: Vec<f64> = order.iter().map(|&j| times[j]).collect();
    let risk_start: Vec<usize> = failure_times
        .iter()
        .map(|t| sorted_times.partition_point(|y| *y < *t))
        .collect();

    let mut n_risk_times = vec![0usize; n];
    for j in 0..n {
        n_risk_times[j] = failure_times.partition_point(|t| *t <= times[j]);
    }

    Ok(RiskSetIndex {
        order,
        failure_times,
        risk_start,
        tied_failures,
        tied_weight,
        n_risk_times,
    })
}

/// Interaction matrix with block k equal to the columns of `Z` scaled rowwise
/// by `X_k`, i.e. `w[j, k*nz + l] = x[j,k] * z[j,l]`.
#[derive(Debug, Clone)]
pub struct InteractionDesign {
    w: Array2<f64>,
    p: usize,
    nz: usize,
}

impl InteractionDesign {
    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Columns of block k (the interactions of feature k with every modifier).
    pub fn block(&self, k: usize) -> ArrayView2<'_, f64> {
        self.w
            .slice(ndarray::s![.., k * self.nz..(k + 1) * self.nz])
    }
}

pub fn build_interactions(x: &Array2<f64>, z: &Array2<f64>) -> Result<InteractionDesign> {
    if x.nrows() != z.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "X rows={} Z rows={}",
            x.nrows(),
            z.nrows()
        )));
    }
    let (n, p) = (x.nrows(), x.ncols());
    let nz = z.ncols();
    let mut w = Array2::zeros((n, p * nz).f());
    for k in 0..p {
        for l in 0..nz {
            for j in 0..n {
                w[[j, k * nz + l]] = x[[j, k]] * z[[j, l]];
            }
        }
    }
    Ok(InteractionDesign { w, p, nz })
}

/// Per-column centering/scaling record (population sd, divisor n).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColumnScale {
    pub mean: f64,
    pub sd: f64,
}

impl ColumnScale {
    pub fn identity() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }
}

/// Center and scale each column to mean 0, population sd 1, in place.
pub fn standardize_columns(a: &mut Array2<f64>, matrix: &'static str) -> Result<Vec<ColumnScale>> {
    let n = a.nrows();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "standardization needs at least 2 rows".into(),
        ));
    }
    let mut scales = Vec::with_capacity(a.ncols());
    for c in 0..a.ncols() {
        let mut col = a.column_mut(c);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if sd <= 0.0 {
            return Err(Error::ConstantColumn { matrix, index: c });
        }
        col.mapv_inplace(|v| (v - mean) / sd);
        scales.push(ColumnScale { mean, sd });
    }
    Ok(scales)
}

/// Scaling applied to a dataset's X and Z columns.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScalingRecord {
    pub x: Vec<ColumnScale>,
    pub z: Vec<ColumnScale>,
}

/// Standardize X and Z columns of a dataset (times, status, weights
/// untouched). The record suffices to map coefficients back to the original
/// scale.
pub fn standardize(data: &SurvivalDataset) -> Result<(SurvivalDataset, ScalingRecord)> {
    let mut x = data.x().clone();
    let mut z = data.z().clone();
    let sx = standardize_columns(&mut x, "X")?;
    let sz = standardize_columns(&mut z, "Z")?;
    let ds = SurvivalDataset::new(
        data.time().clone(),
        data.status().clone(),
        Some(data.weight().clone()),
        x,
        Some(z),
    )?;
    Ok((ds, ScalingRecord { x: sx, z: sz }))
}
