//! Sample autocovariances, banding and thresholding, and bootstrap tuning.
//!
//! The lag-`j` sample autocovariance divides by `n`, not `n - j`:
//! `Σ̂_j = (1/n) Σ_t (y_t - ȳ)(y_{t+j} - ȳ)ᵀ`. The wild bootstrap reweights
//! each summand by an i.i.d. unit-mean, unit-variance weight and scores a
//! candidate tuning value by the average matrix L1 distance between the
//! regularised replicate and `Σ̂_j`.

use std::path::{Path, PathBuf};

use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{band_dense, DenseMatrix};
use crate::model::TimeSeries;
use crate::rng::SeedStream;

/// Default number of bootstrap replicates.
pub const DEFAULT_REPLICATES: usize = 100;
/// Number of points in the default threshold grid.
pub const THRESHOLD_GRID_POINTS: usize = 51;

/// Rows of the centred series, `z[i][t] = y_{i,t} - ȳ_i`.
fn centred_rows(ts: &TimeSeries) -> Vec<Vec<f64>> {
    let means = ts.means();
    (0..ts.p())
        .map(|i| ts.series(i).iter().map(|v| v - means[i]).collect())
        .collect()
}

fn check_lag(ts: &TimeSeries, j: usize) -> Result<()> {
    if j >= ts.n() {
        return Err(Error::InvalidArgument(format!(
            "lag {j} must be below the series length {}",
            ts.n()
        )));
    }
    Ok(())
}

/// `(1/n) Σ_t w_t z_t z_{t+j}ᵀ`; unit weights when `w` is `None`.
fn weighted_autocov(z: &[Vec<f64>], n: usize, j: usize, w: Option<&[f64]>) -> DenseMatrix {
    let p = z.len();
    let m = n - j;
    let lead: Vec<Vec<f64>> = match w {
        Some(w) => z.iter().map(|r| r[..m].iter().zip(w).map(|(a, b)| a * b).collect()).collect(),
        None => z.iter().map(|r| r[..m].to_vec()).collect(),
    };
    let scale = 1.0 / n as f64;
    DenseMatrix::from_fn(p, p, |a, b| {
        crate::linalg::dot(&lead[a], &z[b][j..]) * scale
    })
}

/// `Σ̂_j` with divisor `n`.
pub fn sample_autocov(ts: &TimeSeries, j: usize) -> Result<DenseMatrix> {
    check_lag(ts, j)?;
    Ok(weighted_autocov(&centred_rows(ts), ts.n(), j, None))
}

/// Banding operator `B_r`: keeps entries with `|i - j| <= r`.
pub fn band(h: &DenseMatrix, r: usize) -> DenseMatrix {
    band_dense(h, r)
}

/// Hard thresholding: keeps entries with `|h_ij| > t`.
pub fn threshold(h: &DenseMatrix, t: f64) -> DenseMatrix {
    h.map(|v| if v.abs() > t { v } else { 0.0 })
}

/// `r_n = round(c log(n / log p))`.
pub fn default_band_width(n: usize, p: usize, c: f64) -> Result<usize> {
    if p <= 1 {
        return Err(Error::InvalidArgument(format!("the r_n rule needs p >= 2, got {p}")));
    }
    let lp = (p as f64).ln();
    if lp >= n as f64 {
        return Err(Error::InvalidArgument(format!(
            "the r_n rule needs n > log p (n = {n}, log p = {lp:.3})"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("the r_n constant must be positive, got {c}")));
    }
    Ok((c * (n as f64 / lp).ln()).round().max(0.0) as usize)
}

/// `0..=min(p - 1, 2 r_n + 5)` with `r_n` at `c = 1`.
pub fn default_band_grid(n: usize, p: usize) -> Result<Vec<usize>> {
    let r = default_band_width(n, p, 1.0)?;
    Ok((0..=(p - 1).min(2 * r + 5)).collect())
}

/// Evenly spaced thresholds from 0 to the largest absolute entry of `h`.
pub fn default_threshold_grid(h: &DenseMatrix) -> Vec<f64> {
    let top = h.max_abs();
    let steps = THRESHOLD_GRID_POINTS - 1;
    (0..=steps).map(|s| top * s as f64 / steps as f64).collect()
}

/// Distribution of the bootstrap weights `u_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    /// Standard exponential.
    #[default]
    Exponential,
    /// `N(1, 1)`.
    Normal,
    /// All weights 1: every replicate equals `Σ̂_j`.
    Ones,
}

impl WeightLaw {
    fn draw(self, rng: &mut crate::rng::StreamRng, m: usize) -> Vec<f64> {
        match self {
            WeightLaw::Exponential => (0..m).map(|_| Exp1.sample(rng)).collect(),
            WeightLaw::Normal => (0..m)
                .map(|_| 1.0 + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                .collect(),
            WeightLaw::Ones => vec![1.0; m],
        }
    }
}

/// Bootstrap risk curve over a tuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRisk<T> {
    pub grid: Vec<T>,
    /// `R*(g) = (1/q) Σ_k ‖R_g(Σ*_k) - Σ̂_j‖₁` per grid value.
    pub risk: Vec<f64>,
    pub q: usize,
    /// Grid value of the first minimum.
    pub argmin: T,
}

/// Column-sum L1 norm of `op(Σ*) - Σ̂`, computed without allocating.
fn l1_distance(star: &DenseMatrix, hat: &DenseMatrix, keep: impl Fn(usize, usize, f64) -> bool) -> f64 {
    let p = hat.rows();
    let mut sums = vec![0.0; p];
    for a in 0..p {
        let (sr, hr) = (star.row(a), hat.row(a));
        for b in 0..p {
            let v = if keep(a, b, sr[b]) { sr[b] } else { 0.0 };
            sums[b] += (v - hr[b]).abs();
        }
    }
    sums.into_iter().fold(0.0, f64::max)
}

/// Shared driver: replicate `k` draws its weights from `stream.index(k)`.
fn bootstrap<T: Copy + Send + Sync>(
    ts: &TimeSeries,
    j: usize,
    grid: &[T],
    q: usize,
    stream: &SeedStream,
    law: WeightLaw,
    keep: impl Fn(T, usize, usize, f64) -> bool + Sync,
) -> Result<BootstrapRisk<T>> {
    check_lag(ts, j)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    }
    if q == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap replicate is needed".into()));
    }
    let z = centred_rows(ts);
    let n = ts.n();
    let hat = weighted_autocov(&z, n, j, None);
    let per_rep: Vec<Vec<f64>> = (0..q)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.index(k as u64).rng();
            let w = law.draw(&mut rng, n - j);
            let star = weighted_autocov(&z, n, j, Some(&w));
            grid.iter()
                .map(|&g| l1_distance(&star, &hat, |a, b, v| keep(g, a, b, v)))
                .collect()
        })
        .collect();
    let mut risk = vec![0.0; grid.len()];
    for rep in &per_rep {
        for (r, v) in risk.iter_mut().zip(rep) {
            *r += v;
        }
    }
    risk.iter_mut().for_each(|r| *r /= q as f64);
    let mut best = 0;
    for (c, &v) in risk.iter().enumerate() {
        if v < risk[best] {
            best = c;
        }
    }
    Ok(BootstrapRisk {
        grid: grid.to_vec(),
        risk,
        q,
        argmin: grid[best],
    })
}

/// Wild-bootstrap choice of the banding parameter `r` for lag `j`.
pub fn bootstrap_select_band(
    ts: &TimeSeries,
    j: usize,
    grid: &[usize],
    q: usize,
    stream: &SeedStream,
    law: WeightLaw,
) -> Result<BootstrapRisk<usize>> {
    bootstrap(ts, j, grid, q, stream, law, |r, a, b, _| a.abs_diff(b) <= r)
}

/// Wild-bootstrap choice of the hard threshold `t` for lag `j`.
pub fn bootstrap_select_threshold(
    ts: &TimeSeries,
    j: usize,
    grid: &[f64],
    q: usize,
    stream: &SeedStream,
    law: WeightLaw,
) -> Result<BootstrapRisk<f64>> {
    if grid.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::InvalidArgument("thresholds must be non-negative".into()));
    }
    bootstrap(ts, j, grid, q, stream, law, |t, _, _, v| v.abs() > t)
}

/// How an estimate was regularised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Sample,
    Banded { r: usize },
    Thresholded { t: f64 },
}

/// How the tuning value was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tuning {
    None,
    Fixed,
    /// The `r_n` rule with constant `c`.
    Rule { c: f64 },
    Bootstrap { q: usize, law: WeightLaw },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovEstimate {
    pub lag: usize,
    pub matrix: DenseMatrix,
    pub method: Method,
    pub tuning: Tuning,
}

impl AutocovEstimate {
    pub fn sample(ts: &TimeSeries, j: usize) -> Result<Self> {
        Ok(Self {
            lag: j,
            matrix: sample_autocov(ts, j)?,
            method: Method::Sample,
            tuning: Tuning::None,
        })
    }

    pub fn banded(ts: &TimeSeries, j: usize, r: usize, tuning: Tuning) -> Result<Self> {
        Ok(Self {
            lag: j,
            matrix: band(&sample_autocov(ts, j)?, r),
            method: Method::Banded { r },
            tuning,
        })
    }

    pub fn thresholded(ts: &TimeSeries, j: usize, t: f64, tuning: Tuning) -> Result<Self> {
        Ok(Self {
            lag: j,
            matrix: threshold(&sample_autocov(ts, j)?, t),
            method: Method::Thresholded { t },
            tuning,
        })
    }

    /// Writes the matrix as CSV and `{schema_version, lag, method, tuning}`
    /// next to it with a `.json` extension. Returns the sidecar path.
    pub fn write(&self, csv_path: &Path) -> Result<PathBuf> {
        crate::io::write_matrix(&self.matrix, std::fs::File::create(csv_path)?)?;
        let sidecar = csv_path.with_extension("json");
        crate::io::write_json(
            &serde_json::json!({
                "schema_version": crate::SCHEMA_VERSION,
                "lag": self.lag,
                "method": self.method,
                "tuning": self.tuning,
            }),
            &sidecar,
        )?;
        Ok(sidecar)
    }
}
