//! Data generation: banded coefficient matrices for the two simulation
//! settings, the structured innovation covariance `B Bᵀ`, and VAR paths.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{banded_spectral_norm_or_svd, band_product, psd_factor, BandedMatrix, DenseMatrix};
use crate::model::{BandedVarModel, TimeSeries, DEFAULT_STATIONARITY_MARGIN};
use crate::rng::{SeedStream, StreamRng};

pub const DEFAULT_BURN_IN: usize = 500;

/// How the in-band coefficients are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSetting {
    /// Every in-band entry i.i.d. U[-1, 1].
    Uniform,
    /// Interior entries 0 w.p. 0.4 else N(0, 1); entries on `|i - j| = k0`
    /// drawn from {-4, 4}.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    Identity,
    /// `B Bᵀ` from [`gen_sigma_eps_structured`].
    StructuredBbt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p: usize,
    pub n: usize,
    pub k0: usize,
    pub d: usize,
    pub setting: CoeffSetting,
    /// Fix `‖A‖₂` instead of drawing it from U[0.3, 1).
    pub target_norm: Option<f64>,
    pub burn_in: usize,
    pub seed: u64,
    pub sigma_eps_kind: SigmaKind,
}

impl SimConfig {
    pub fn new(p: usize, n: usize, k0: usize, setting: CoeffSetting, seed: u64) -> Self {
        Self {
            p,
            n,
            k0,
            d: 1,
            setting,
            target_norm: None,
            burn_in: DEFAULT_BURN_IN,
            seed,
            sigma_eps_kind: SigmaKind::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 1 {
            return Err(Error::UnsupportedOrder { d: self.d });
        }
        if self.p < 2 * self.k0 + 1 {
            return Err(Error::InvalidArgument(format!(
                "p = {} is below 2 k0 + 1 = {}",
                self.p,
                2 * self.k0 + 1
            )));
        }
        if self.setting == CoeffSetting::Mixture && self.k0 == 0 {
            return Err(Error::InvalidArgument(
                "the mixture setting needs k0 >= 1 (its band-edge entries are undefined at k0 = 0)"
                    .into(),
            ));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if let Some(t) = self.target_norm {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "target spectral norm {t} outside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

fn check_shape(p: usize, k0: usize) -> Result<()> {
    if p < 2 * k0 + 1 {
        return Err(Error::InvalidArgument(format!(
            "p = {p} is below 2 k0 + 1 = {}",
            2 * k0 + 1
        )));
    }
    Ok(())
}

/// Rescales to spectral norm `target`, or to `η ~ U[0.3, 1)` when `None`.
fn rescale(a: BandedMatrix, target: Option<f64>, rng: &mut StreamRng) -> Result<Option<BandedMatrix>> {
    let norm = banded_spectral_norm_or_svd(&a)?;
    if norm == 0.0 {
        return Ok(None);
    }
    let eta = target.unwrap_or_else(|| rng.random_range(0.3..1.0));
    Ok(Some(a.scale(eta / norm)))
}

fn draw_until_nonzero(
    p: usize,
    k0: usize,
    target: Option<f64>,
    rng: &mut StreamRng,
    mut entry: impl FnMut(usize, &mut StreamRng) -> f64,
) -> Result<BandedMatrix> {
    loop {
        let mut a = BandedMatrix::zeros(p, k0)?;
        for i in 0..p {
            let (lo, hi) = a.row_span(i);
            for j in lo..=hi {
                a.set(i, j, entry(i.abs_diff(j), rng))?;
            }
        }
        if let Some(scaled) = rescale(a, target, rng)? {
            return Ok(scaled);
        }
    }
}

/// Setting (i): in-band entries U[-1, 1], rescaled to `η A / ‖A‖₂`.
pub fn gen_coeff_uniform(p: usize, k0: usize, rng: &mut StreamRng) -> Result<BandedMatrix> {
    gen_coefficients(CoeffSetting::Uniform, p, k0, None, rng)
}

/// Setting (ii): sparse interior, `±4` band edge, rescaled as setting (i).
pub fn gen_coeff_mixture(p: usize, k0: usize, rng: &mut StreamRng) -> Result<BandedMatrix> {
    gen_coefficients(CoeffSetting::Mixture, p, k0, None, rng)
}

/// Coefficient matrix for either setting, optionally with a fixed spectral norm.
pub fn gen_coefficients(
    setting: CoeffSetting,
    p: usize,
    k0: usize,
    target_norm: Option<f64>,
    rng: &mut StreamRng,
) -> Result<BandedMatrix> {
    check_shape(p, k0)?;
    match setting {
        CoeffSetting::Uniform => {
            draw_until_nonzero(p, k0, target_norm, rng, |_, r| r.random_range(-1.0..=1.0))
        }
        CoeffSetting::Mixture => {
            if k0 == 0 {
                return Err(Error::InvalidArgument(
                    "the mixture setting needs k0 >= 1".into(),
                ));
            }
            draw_until_nonzero(p, k0, target_norm, rng, |dist, r| {
                if dist == k0 {
                    if r.random_bool(0.5) {
                        4.0
                    } else {
                        -4.0
                    }
                } else if r.random_bool(0.4) {
                    0.0
                } else {
                    StandardNormal.sample(r)
                }
            })
        }
    }
}

/// `B` with `b_11 = 1` and otherwise `b_ij = 0.8·1{|i-j| = 1} + 0.6·1{i = j}`.
pub fn structured_factor(p: usize) -> Result<BandedMatrix> {
    if p < 2 {
        return Err(Error::InvalidArgument("structured covariance needs p >= 2".into()));
    }
    let mut b = BandedMatrix::zeros(p, 1)?;
    for i in 0..p {
        b.set(i, i, if i == 0 { 1.0 } else { 0.6 })?;
        if i + 1 < p {
            b.set(i, i + 1, 0.8)?;
            b.set(i + 1, i, 0.8)?;
        }
    }
    Ok(b)
}

/// `Σ_ε = B Bᵀ` (bandwidth parameter 2).
pub fn gen_sigma_eps_structured(p: usize) -> Result<DenseMatrix> {
    let b = structured_factor(p)?;
    Ok(band_product(&b, &b.transpose())?.to_dense())
}

/// Source of innovation vectors for [`simulate_var_with`].
pub trait InnovationSampler {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut StreamRng, out: &mut [f64]);
}

/// `N(0, Σ)` innovations through a fixed factor `L Lᵀ = Σ`.
#[derive(Debug, Clone)]
pub struct GaussianInnovations {
    dim: usize,
    /// `None` stands for the identity.
    factor: Option<DenseMatrix>,
}

impl GaussianInnovations {
    pub fn standard(dim: usize) -> Self {
        Self { dim, factor: None }
    }

    pub fn new(sigma: &DenseMatrix) -> Result<Self> {
        let dim = sigma.rows();
        if *sigma == DenseMatrix::identity(dim) {
            return Ok(Self::standard(dim));
        }
        Ok(Self {
            dim,
            factor: Some(psd_factor(sigma)?),
        })
    }
}

impl InnovationSampler for GaussianInnovations {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        match &self.factor {
            None => out.iter_mut().for_each(|o| *o = StandardNormal.sample(rng)),
            Some(l) => {
                let z: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(rng)).collect();
                for (i, o) in out.iter_mut().enumerate() {
                    // lower-triangular factors only need the first i+1 terms,
                    // but eigen-based factors are full
                    *o = crate::linalg::dot(l.row(i), &z);
                }
            }
        }
    }
}

/// Gaussian path of length `n` after `burn_in` discarded steps, started at
/// the process mean. Innovations are `N(0, Σ_ε)` (identity when the model
/// carries no covariance).
pub fn simulate_var(
    model: &BandedVarModel,
    n: usize,
    burn_in: usize,
    rng: &mut StreamRng,
) -> Result<TimeSeries> {
    let sampler = GaussianInnovations::new(&model.innovation_covariance())?;
    simulate_var_with(model, n, burn_in, &sampler, rng, false)
}

/// [`simulate_var`] with an arbitrary innovation sampler. Non-stationary
/// models are refused unless `allow_explosive`.
pub fn simulate_var_with(
    model: &BandedVarModel,
    n: usize,
    burn_in: usize,
    sampler: &dyn InnovationSampler,
    rng: &mut StreamRng,
    allow_explosive: bool,
) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let p = model.p();
    if sampler.dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "innovations of dimension {} for a model of dimension {p}",
            sampler.dim()
        )));
    }
    if !allow_explosive {
        model.require_stationary(DEFAULT_STATIONARITY_MARGIN)?;
    }
    let d = model.d();
    let total = burn_in + n;
    // ring buffer of the last d centred states, most recent first
    let mut history: Vec<Vec<f64>> = vec![vec![0.0; p]; d];
    let mut next = vec![0.0; p];
    let mut tmp = vec![0.0; p];
    let mut values = DenseMatrix::zeros(p, n);
    for t in 0..total {
        sampler.sample(rng, &mut next);
        for (a, past) in model.coeffs().iter().zip(&history) {
            a.matvec_into(past, &mut tmp);
            for (x, v) in next.iter_mut().zip(&tmp) {
                *x += v;
            }
        }
        history.rotate_right(1);
        history[0].copy_from_slice(&next);
        if t >= burn_in {
            let col = t - burn_in;
            for i in 0..p {
                let mean = model.mean().map_or(0.0, |m| m[i]);
                values[(i, col)] = next[i] + mean;
            }
        }
    }
    if values.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "simulated path overflowed to non-finite values".into(),
        ));
    }
    TimeSeries::new(values)
}

/// A ground-truth model together with a path drawn from it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub model: BandedVarModel,
    pub series: TimeSeries,
}

/// Draws the coefficients from substream `coeffs` and the path from
/// substream `innovations` of `stream`.
pub fn simulate_with_stream(cfg: &SimConfig, stream: &SeedStream) -> Result<Simulation> {
    cfg.validate()?;
    let mut coeff_rng = stream.substream("coeffs").rng();
    let a = gen_coefficients(cfg.setting, cfg.p, cfg.k0, cfg.target_norm, &mut coeff_rng)?;
    let (sigma, sampler) = match cfg.sigma_eps_kind {
        SigmaKind::Identity => (DenseMatrix::identity(cfg.p), GaussianInnovations::standard(cfg.p)),
        SigmaKind::StructuredBbt => {
            let b = structured_factor(cfg.p)?;
            let sigma = band_product(&b, &b.transpose())?.to_dense();
            let sampler = GaussianInnovations {
                dim: cfg.p,
                factor: Some(b.to_dense()),
            };
            (sigma, sampler)
        }
    };
    let model = BandedVarModel::new(vec![a], cfg.k0, Some(sigma))?;
    let mut innov_rng = stream.substream("innovations").rng();
    let series = simulate_var_with(&model, cfg.n, cfg.burn_in, &sampler, &mut innov_rng, false)?;
    Ok(Simulation { model, series })
}

/// [`simulate_with_stream`] rooted at the config's own seed.
pub fn simulate(cfg: &SimConfig) -> Result<Simulation> {
    simulate_with_stream(cfg, &SeedStream::new(cfg.seed))
}
