//! Banded VAR(d) models: representation, companion form, stationarity and
//! the population autocovariances of a VAR(1).

mod series;

pub use series::{validate_permutation, TimeSeries};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_norm, l1_norm, spectral_norm_or_svd, spectral_radius, symmetric_eigenvalues, BandedMatrix,
    DenseMatrix,
};

/// Default stationarity margin: spectral radius must stay below `1 - margin`.
pub const DEFAULT_STATIONARITY_MARGIN: f64 = 1e-6;
/// Series terms with Frobenius norm below this are dropped.
pub const SERIES_TOLERANCE: f64 = 1e-12;
/// Hard cap on series terms when no explicit limit is given.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// `y_t = mean + sum_l A_l (y_{t-l} - mean) + e_t` with every `A_l` banded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct BandedVarModel {
    p: usize,
    k0: usize,
    coeffs: Vec<BandedMatrix>,
    sigma_eps: Option<DenseMatrix>,
    mean: Option<Vec<f64>>,
}

impl BandedVarModel {
    /// Validates the band constraint `a_ij = 0` for `|i - j| > k0` on every lag.
    pub fn new(
        coeffs: Vec<BandedMatrix>,
        k0: usize,
        sigma_eps: Option<DenseMatrix>,
    ) -> Result<Self> {
        let p = coeffs
            .first()
            .ok_or_else(|| Error::InvalidArgument("a VAR model needs at least one lag".into()))?
            .dim();
        if k0 >= p {
            return Err(Error::InvalidArgument(format!(
                "bandwidth parameter {k0} must be below the dimension {p}"
            )));
        }
        let mut stored = Vec::with_capacity(coeffs.len());
        for (l, a) in coeffs.iter().enumerate() {
            if a.dim() != p {
                return Err(Error::DimensionMismatch(format!(
                    "lag {} coefficient is {}x{0}, expected {p}x{p}",
                    l + 1,
                    a.dim()
                )));
            }
            if a.effective_bandwidth() > k0 {
                return Err(Error::InvalidArgument(format!(
                    "lag {} coefficient has entries outside bandwidth parameter {k0}",
                    l + 1
                )));
            }
            stored.push(BandedMatrix::truncate_dense(&a.to_dense(), k0)?);
        }
        if let Some(s) = &sigma_eps {
            validate_covariance(s, p)?;
        }
        Ok(Self {
            p,
            k0,
            coeffs: stored,
            sigma_eps,
            mean: None,
        })
    }

    /// Process mean the dynamics are centred on (set when fitted to demeaned data).
    pub fn with_mean(mut self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "mean of length {} for dimension {}",
                mean.len(),
                self.p
            )));
        }
        self.mean = Some(mean);
        Ok(self)
    }

    pub fn with_sigma_eps(mut self, sigma: DenseMatrix) -> Result<Self> {
        validate_covariance(&sigma, self.p)?;
        self.sigma_eps = Some(sigma);
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> usize {
        self.coeffs.len()
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    /// `A_1, ..., A_d`.
    pub fn coeffs(&self) -> &[BandedMatrix] {
        &self.coeffs
    }

    pub fn sigma_eps(&self) -> Option<&DenseMatrix> {
        self.sigma_eps.as_ref()
    }

    pub fn mean(&self) -> Option<&[f64]> {
        self.mean.as_deref()
    }

    /// The `dp x dp` companion matrix: `(A_1 ... A_d)` on top, identity
    /// blocks on the block sub-diagonal.
    pub fn companion_matrix(&self) -> DenseMatrix {
        let (p, d) = (self.p, self.d());
        let mut c = DenseMatrix::zeros(d * p, d * p);
        for (l, a) in self.coeffs.iter().enumerate() {
            for (i, j, v) in a.band_entries() {
                c[(i, l * p + j)] = v;
            }
        }
        for b in 1..d {
            for i in 0..p {
                c[(b * p + i, (b - 1) * p + i)] = 1.0;
            }
        }
        c
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.companion_matrix())
    }

    /// Spectral radius of the companion matrix below `1 - margin`.
    pub fn is_stationary(&self, margin: f64) -> Result<bool> {
        Ok(self.spectral_radius()? < 1.0 - margin)
    }

    pub(crate) fn require_stationary(&self, margin: f64) -> Result<()> {
        let radius = self.spectral_radius()?;
        if radius < 1.0 - margin {
            Ok(())
        } else {
            Err(Error::NonStationary { radius, margin })
        }
    }

    /// Spectral norm of `A_1` (the `δ` of the geometric-decay bounds for d = 1).
    pub fn coefficient_norm(&self) -> Result<f64> {
        spectral_norm_or_svd(&self.coeffs[0].to_dense())
    }

    pub fn innovation_covariance(&self) -> DenseMatrix {
        self.sigma_eps
            .clone()
            .unwrap_or_else(|| DenseMatrix::identity(self.p))
    }
}

fn validate_covariance(s: &DenseMatrix, p: usize) -> Result<()> {
    if s.rows() != p || s.cols() != p {
        return Err(Error::DimensionMismatch(format!(
            "innovation covariance is {}x{}, expected {p}x{p}",
            s.rows(),
            s.cols()
        )));
    }
    if s.asymmetry() > 1e-12 {
        return Err(Error::InvalidArgument(
            "innovation covariance is not symmetric".into(),
        ));
    }
    let min_ev = symmetric_eigenvalues(s)?[0];
    if min_ev < -1e-10 {
        return Err(Error::InvalidArgument(format!(
            "innovation covariance has eigenvalue {min_ev:.3e} < 0"
        )));
    }
    Ok(())
}

/// Interchange form of [`BandedVarModel`]: coefficients written dense.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRecord {
    #[serde(default = "crate::io::current_schema")]
    pub schema_version: u32,
    pub p: usize,
    pub d: usize,
    pub k0: usize,
    pub coeffs: Vec<DenseMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eps: Option<DenseMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
}

impl From<BandedVarModel> for ModelRecord {
    fn from(m: BandedVarModel) -> Self {
        ModelRecord {
            schema_version: crate::SCHEMA_VERSION,
            p: m.p,
            d: m.d(),
            k0: m.k0,
            coeffs: m.coeffs.iter().map(BandedMatrix::to_dense).collect(),
            sigma_eps: m.sigma_eps,
            mean: m.mean,
        }
    }
}

impl TryFrom<ModelRecord> for BandedVarModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        if r.coeffs.len() != r.d {
            return Err(Error::InvalidArgument(format!(
                "d = {} but {} coefficient matrices",
                r.d,
                r.coeffs.len()
            )));
        }
        let coeffs = r
            .coeffs
            .iter()
            .map(|c| BandedMatrix::from_dense(c, r.k0))
            .collect::<Result<Vec<_>>>()?;
        let model = BandedVarModel::new(coeffs, r.k0, r.sigma_eps)?;
        if model.p != r.p {
            return Err(Error::DimensionMismatch(format!(
                "p = {} but coefficients are {}x{1}",
                r.p, model.p
            )));
        }
        match r.mean {
            Some(mean) => model.with_mean(mean),
            None => Ok(model),
        }
    }
}

/// Population autocovariance of a VAR(1) from the truncated series
/// `Σ_0 = Σ_ε + Σ_{i≥1} A^i Σ_ε (Aᵀ)^i` and, for `j > 0`,
/// `Σ_j = cov(y_t, y_{t+j}) = Σ_0 (Aᵀ)^j`, the target of
/// [`crate::autocov::sample_autocov`].
#[derive(Debug, Clone)]
pub struct TheoreticalAutocov {
    pub lag: usize,
    pub matrix: DenseMatrix,
    /// Number of series terms `i >= 1` actually summed.
    pub terms_used: usize,
}

/// `A T` for banded `A` and dense `T`.
fn banded_times_dense(a: &BandedMatrix, t: &DenseMatrix) -> DenseMatrix {
    let p = a.dim();
    let mut out = DenseMatrix::zeros(p, t.cols());
    for i in 0..p {
        let (lo, hi) = a.row_span(i);
        for l in lo..=hi {
            let av = a.get(i, l);
            if av == 0.0 {
                continue;
            }
            let src = t.row(l).to_vec();
            for (o, s) in out.row_mut(i).iter_mut().zip(src) {
                *o += av * s;
            }
        }
    }
    out
}

/// `A T Aᵀ` for symmetric `T`: `A (A T)ᵀ`.
fn congruence(a: &BandedMatrix, t: &DenseMatrix) -> DenseMatrix {
    let at = banded_times_dense(a, t);
    banded_times_dense(a, &at.transpose())
}

fn var1_parts(m: &BandedVarModel) -> Result<(&BandedMatrix, DenseMatrix)> {
    if m.d() != 1 {
        return Err(Error::UnsupportedOrder { d: m.d() });
    }
    let sigma = m
        .sigma_eps
        .clone()
        .ok_or_else(|| Error::InvalidArgument("innovation covariance required".into()))?;
    m.require_stationary(DEFAULT_STATIONARITY_MARGIN)?;
    Ok((&m.coeffs[0], sigma))
}

/// Sums `A^i Σ_ε (Aᵀ)^i` for `i` in `first..=last` (stopping early once a
/// term's Frobenius norm drops below [`SERIES_TOLERANCE`]); returns the sum
/// and the index of the last term added.
fn series_block(a: &BandedMatrix, sigma: &DenseMatrix, first: usize, last: usize) -> (DenseMatrix, usize) {
    let mut term = sigma.clone();
    for _ in 0..first {
        term = congruence(a, &term);
    }
    let mut sum = DenseMatrix::zeros(sigma.rows(), sigma.cols());
    let mut i = first;
    loop {
        let small = frobenius_norm(&term) < SERIES_TOLERANCE;
        sum = sum.add(&term).expect("conformable");
        if small || i >= last {
            return (sum, i);
        }
        term = congruence(a, &term);
        i += 1;
    }
}

/// `M (Aᵀ)^j` for symmetric `M`, as `(A^j M)ᵀ`.
fn lag_product(a: &BandedMatrix, m: DenseMatrix, j: usize) -> DenseMatrix {
    if j == 0 {
        return m;
    }
    (0..j).fold(m, |acc, _| banded_times_dense(a, &acc)).transpose()
}

/// Lag-`j` autocovariance of a stationary VAR(1), using at most `terms` series
/// terms beyond `Σ_ε`.
pub fn theoretical_autocov_var1(m: &BandedVarModel, j: usize, terms: usize) -> Result<TheoreticalAutocov> {
    if terms == 0 {
        return Err(Error::InvalidArgument("at least one series term required".into()));
    }
    let (a, sigma) = var1_parts(m)?;
    let (sigma0, used) = series_block(a, &sigma, 0, terms);
    Ok(TheoreticalAutocov {
        lag: j,
        matrix: lag_product(a, sigma0, j),
        terms_used: used,
    })
}

/// Distance between `Σ_j` and its `r`-term truncation
/// `Σ_j^{(r)} = (Σ_ε + Σ_{i=1}^{r} A^i Σ_ε (Aᵀ)^i) (Aᵀ)^j`, as
/// `(spectral norm, matrix L1 norm)`.
pub fn banded_approximation_gap(m: &BandedVarModel, j: usize, r: usize) -> Result<(f64, f64)> {
    let (a, sigma) = var1_parts(m)?;
    let (tail, _) = series_block(a, &sigma, r + 1, r + 1 + MAX_SERIES_TERMS);
    let gap = lag_product(a, tail, j);
    Ok((spectral_norm_or_svd(&gap)?, l1_norm(&gap)))
}
