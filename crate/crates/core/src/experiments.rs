//! Monte Carlo studies: bandwidth-selection frequencies, coefficient
//! estimation errors, autocovariance estimation errors and the ordering
//! comparison.
//!
//! Replication `r` of a study draws everything from
//! `SeedStream::new(seed).substream(<study>).substream("rep").index(r)`, so
//! results do not depend on the number of worker threads.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autocov::{
    bootstrap_select_band, bootstrap_select_threshold, default_band_grid, default_threshold_grid,
    sample_autocov, band, threshold, WeightLaw, DEFAULT_REPLICATES,
};
use crate::error::{Error, Result};
use crate::estimation::fit_banded_var;
use crate::forecast::{rolling_evaluation, EvaluationOptions, FitSpec};
use crate::linalg::{frobenius_norm, l1_norm, spectral_norm_or_svd, DenseMatrix};
use crate::model::{theoretical_autocov_var1, BandedVarModel, MAX_SERIES_TERMS};
use crate::rng::SeedStream;
use crate::selection::{joint_bic_select, ordering_score, select_bandwidth, BicConfig};
use crate::simulate::{simulate_with_stream, CoeffSetting, SigmaKind, SimConfig, DEFAULT_BURN_IN};

/// Bandwidth search bound used by the studies.
pub const STUDY_MAX_BANDWIDTH: usize = 15;

/// Shared design of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub p: usize,
    pub n: usize,
    pub k0: usize,
    pub reps: usize,
    pub seed: u64,
    /// Search bound `K`, capped at `p - 1`.
    pub k_max: usize,
    pub bic: BicConfig,
    pub burn_in: usize,
}

impl StudyConfig {
    pub fn new(p: usize, n: usize, k0: usize, reps: usize, seed: u64) -> Self {
        Self {
            p,
            n,
            k0,
            reps,
            seed,
            k_max: STUDY_MAX_BANDWIDTH,
            bic: BicConfig::default(),
            burn_in: DEFAULT_BURN_IN,
        }
    }

    fn search_bound(&self) -> usize {
        self.k_max.min(self.p - 1)
    }

    fn sim(&self, setting: CoeffSetting) -> SimConfig {
        SimConfig {
            burn_in: self.burn_in,
            ..SimConfig::new(self.p, self.n, self.k0, setting, self.seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("at least one replication is needed".into()));
        }
        if self.p < 2 {
            return Err(Error::InvalidArgument("studies need p >= 2".into()));
        }
        Ok(())
    }
}

/// Runs `f(r, stream_r)` for `r = 0..reps` in parallel, results in order.
pub fn run_replications<T: Send>(
    seed: u64,
    study: &str,
    reps: usize,
    f: impl Fn(usize, &SeedStream) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let base = SeedStream::new(seed).substream(study).substream("rep");
    (0..reps)
        .into_par_iter()
        .map(|r| f(r, &base.index(r as u64)))
        .collect()
}

/// Percentages of `{k = k0}`, `{k > k0}` and `{k < k0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequencies {
    pub equal: f64,
    pub over: f64,
    pub under: f64,
}

impl Frequencies {
    pub fn of(values: &[usize], k0: usize) -> Self {
        let pct = |pred: &dyn Fn(usize) -> bool| {
            100.0 * values.iter().filter(|&&v| pred(v)).count() as f64 / values.len() as f64
        };
        Self {
            equal: pct(&|v| v == k0),
            over: pct(&|v| v > k0),
            under: pct(&|v| v < k0),
        }
    }
}

fn setting_name(s: CoeffSetting) -> &'static str {
    match s {
        CoeffSetting::Uniform => "uniform",
        CoeffSetting::Mixture => "mixture",
    }
}

/// Selected bandwidths per replication, marginal (`k̂`) and whole-model (`k̃`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthStudy {
    pub setting: CoeffSetting,
    pub k0: usize,
    pub k_hat: Vec<usize>,
    pub k_tilde: Vec<usize>,
}

impl BandwidthStudy {
    pub fn marginal(&self) -> Frequencies {
        Frequencies::of(&self.k_hat, self.k0)
    }

    pub fn joint(&self) -> Frequencies {
        Frequencies::of(&self.k_tilde, self.k0)
    }
}

pub fn bandwidth_study(cfg: &StudyConfig, setting: CoeffSetting) -> Result<BandwidthStudy> {
    cfg.validate()?;
    let sim = cfg.sim(setting);
    let k_max = cfg.search_bound();
    let out = run_replications(cfg.seed, &format!("bandwidth-{}", setting_name(setting)), cfg.reps, |_, s| {
        let data = simulate_with_stream(&sim, s)?;
        let k_hat = select_bandwidth(&data.series, 1, k_max, &cfg.bic)?.k_hat;
        let k_tilde = joint_bic_select(&data.series, 1, k_max, &cfg.bic)?.k_tilde;
        Ok((k_hat, k_tilde))
    })?;
    let (k_hat, k_tilde) = out.into_iter().unzip();
    Ok(BandwidthStudy {
        setting,
        k0: cfg.k0,
        k_hat,
        k_tilde,
    })
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

/// Errors `Â - A` of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientErrors {
    pub l1: f64,
    pub l2: f64,
    pub frobenius: f64,
}

fn coefficient_errors(fit: &BandedVarModel, truth: &BandedVarModel) -> Result<CoefficientErrors> {
    let diff = fit.coeffs()[0].to_dense().sub(&truth.coeffs()[0].to_dense())?;
    Ok(CoefficientErrors {
        l1: l1_norm(&diff),
        l2: spectral_norm_or_svd(&diff)?,
        frobenius: frobenius_norm(&diff),
    })
}

/// Coefficient estimation errors with the selected and with the true bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationStudy {
    pub k_hat: Vec<usize>,
    pub estimated: Vec<CoefficientErrors>,
    pub oracle: Vec<CoefficientErrors>,
}

impl EstimationStudy {
    pub fn summary(errors: &[CoefficientErrors], f: impl Fn(&CoefficientErrors) -> f64) -> MeanSd {
        MeanSd::of(&errors.iter().map(f).collect::<Vec<_>>())
    }
}

pub fn estimation_study(cfg: &StudyConfig, setting: CoeffSetting) -> Result<EstimationStudy> {
    cfg.validate()?;
    let sim = cfg.sim(setting);
    let k_max = cfg.search_bound();
    let out = run_replications(cfg.seed, &format!("estimation-{}", setting_name(setting)), cfg.reps, |_, s| {
        let data = simulate_with_stream(&sim, s)?;
        let k_hat = select_bandwidth(&data.series, 1, k_max, &cfg.bic)?.k_hat;
        let est = fit_banded_var(&data.series, k_hat, 1, false)?;
        let oracle = if k_hat == cfg.k0 {
            est.clone()
        } else {
            fit_banded_var(&data.series, cfg.k0, 1, false)?
        };
        Ok((
            k_hat,
            coefficient_errors(&est.model, &data.model)?,
            coefficient_errors(&oracle.model, &data.model)?,
        ))
    })?;
    let mut study = EstimationStudy {
        k_hat: Vec::with_capacity(cfg.reps),
        estimated: Vec::with_capacity(cfg.reps),
        oracle: Vec::with_capacity(cfg.reps),
    };
    for (k, e, o) in out {
        study.k_hat.push(k);
        study.estimated.push(e);
        study.oracle.push(o);
    }
    Ok(study)
}

/// Matrix L1 and spectral errors of the three autocovariance estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocovErrors {
    pub banded_l1: f64,
    pub thresholded_l1: f64,
    pub sample_l1: f64,
    pub banded_l2: f64,
    pub thresholded_l2: f64,
    pub sample_l2: f64,
    pub r: usize,
    pub t: f64,
}

/// Per-replication errors at lags 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovStudy {
    pub lag0: Vec<AutocovErrors>,
    pub lag1: Vec<AutocovErrors>,
}

/// Autocovariance design: coefficients of setting (i) rescaled to spectral
/// norm `target_norm`, `Σ_ε = B Bᵀ`, tuning by the wild bootstrap with `q`
/// replicates.
pub fn autocov_study(cfg: &StudyConfig, target_norm: f64, q: usize) -> Result<AutocovStudy> {
    cfg.validate()?;
    let sim = SimConfig {
        target_norm: Some(target_norm),
        sigma_eps_kind: SigmaKind::StructuredBbt,
        ..cfg.sim(CoeffSetting::Uniform)
    };
    let q = if q == 0 { DEFAULT_REPLICATES } else { q };
    let out = run_replications(cfg.seed, "autocov", cfg.reps, |_, s| {
        let data = simulate_with_stream(&sim, s)?;
        let band_grid = default_band_grid(cfg.n, cfg.p)?;
        let mut per_lag = Vec::with_capacity(2);
        for j in 0..2 {
            let truth = theoretical_autocov_var1(&data.model, j, MAX_SERIES_TERMS)?.matrix;
            let hat = sample_autocov(&data.series, j)?;
            let boot = s.substream("bootstrap").index(j as u64);
            let r = bootstrap_select_band(
                &data.series,
                j,
                &band_grid,
                q,
                &boot.substream("band"),
                WeightLaw::Exponential,
            )?
            .argmin;
            let t = bootstrap_select_threshold(
                &data.series,
                j,
                &default_threshold_grid(&hat),
                q,
                &boot.substream("threshold"),
                WeightLaw::Exponential,
            )?
            .argmin;
            let err = |m: &DenseMatrix| -> Result<(f64, f64)> {
                let d = m.sub(&truth)?;
                Ok((l1_norm(&d), spectral_norm_or_svd(&d)?))
            };
            let (banded_l1, banded_l2) = err(&band(&hat, r))?;
            let (thresholded_l1, thresholded_l2) = err(&threshold(&hat, t))?;
            let (sample_l1, sample_l2) = err(&hat)?;
            per_lag.push(AutocovErrors {
                banded_l1,
                thresholded_l1,
                sample_l1,
                banded_l2,
                thresholded_l2,
                sample_l2,
                r,
                t,
            });
        }
        Ok((per_lag[0], per_lag[1]))
    })?;
    let (lag0, lag1) = out.into_iter().unzip();
    Ok(AutocovStudy { lag0, lag1 })
}

/// The orderings compared by [`ordering_study`].
pub const ORDERING_NAMES: [&str; 4] = ["true", "local", "random1", "random2"];

/// Per-ordering, per-replication outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingOutcome {
    pub name: String,
    pub bic: Vec<f64>,
    pub k_hat: Vec<usize>,
    pub one_step: Vec<f64>,
    pub two_step: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingStudy {
    pub holdout: usize,
    pub group: usize,
    pub orderings: Vec<OrderingOutcome>,
}

/// Random permutation inside consecutive blocks of `group` series.
pub fn local_permutation(p: usize, group: usize, rng: &mut crate::rng::StreamRng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..p).collect();
    for block in perm.chunks_mut(group.max(1)) {
        block.shuffle(rng);
    }
    perm
}

/// Setting (i) data observed under the true ordering, a local permutation
/// (shuffles inside blocks of `group`) and two uniformly random
/// permutations. For each ordering the bandwidth is selected on the first
/// `n - holdout` observations (with `k = 0` allowed when the config says
/// so), the model is fitted once on that window, and one- and two-step
/// absolute forecast errors are averaged over the holdout.
pub fn ordering_study(cfg: &StudyConfig, holdout: usize, group: usize) -> Result<OrderingStudy> {
    cfg.validate()?;
    let sim = cfg.sim(CoeffSetting::Uniform);
    let k_max = cfg.search_bound();
    let out = run_replications(cfg.seed, "ordering", cfg.reps, |_, s| {
        let data = simulate_with_stream(&sim, s)?;
        let mut prng = s.substream("permutations").rng();
        let p = cfg.p;
        let mut random1: Vec<usize> = (0..p).collect();
        random1.shuffle(&mut prng);
        let mut random2: Vec<usize> = (0..p).collect();
        random2.shuffle(&mut prng);
        let perms = [
            (0..p).collect::<Vec<_>>(),
            local_permutation(p, group, &mut prng),
            random1,
            random2,
        ];
        let train_end = cfg.n - holdout;
        let train = data.series.slice(0..train_end)?;
        perms
            .iter()
            .map(|perm| {
                let score = ordering_score(&train, perm, 1, k_max, &cfg.bic)?;
                let spec = FitSpec::Estimate {
                    k: Some(score.k_hat),
                    d: 1,
                    k_max: None,
                    bic: cfg.bic,
                    demean: false,
                };
                let rep = rolling_evaluation(
                    &data.series.permuted(perm)?,
                    &spec,
                    holdout,
                    2,
                    EvaluationOptions::default(),
                )?;
                Ok((score.bic_sum, score.k_hat, rep.summary[0].mean, rep.summary[1].mean))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let orderings = ORDERING_NAMES
        .iter()
        .enumerate()
        .map(|(o, name)| OrderingOutcome {
            name: name.to_string(),
            bic: out.iter().map(|r| r[o].0).collect(),
            k_hat: out.iter().map(|r| r[o].1).collect(),
            one_step: out.iter().map(|r| r[o].2).collect(),
            two_step: out.iter().map(|r| r[o].3).collect(),
        })
        .collect();
    Ok(OrderingStudy {
        holdout,
        group,
        orderings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_count_events() {
        let f = Frequencies::of(&[1, 1, 2, 0], 1);
        assert_eq!((f.equal, f.over, f.under), (50.0, 25.0, 25.0));
        let single = Frequencies::of(&[3], 1);
        assert_eq!((single.equal, single.over, single.under), (0.0, 100.0, 0.0));
    }

    #[test]
    fn mean_sd_basics() {
        let m = MeanSd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.sd - 1.0).abs() < 1e-15);
        assert_eq!(MeanSd::of(&[4.0]).sd, 0.0);
    }

    #[test]
    fn local_permutation_stays_in_blocks() {
        let mut rng = SeedStream::new(1).rng();
        let perm = local_permutation(12, 5, &mut rng);
        for (m, &src) in perm.iter().enumerate() {
            assert_eq!(m / 5, src / 5);
        }
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn small_studies_are_reproducible() {
        let cfg = StudyConfig::new(12, 80, 1, 3, 9);
        let a = bandwidth_study(&cfg, CoeffSetting::Mixture).unwrap();
        let b = bandwidth_study(&cfg, CoeffSetting::Mixture).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.k_hat.len(), 3);
        let e = estimation_study(&cfg, CoeffSetting::Uniform).unwrap();
        assert!(e.oracle.iter().all(|o| o.l2 <= o.l1 + 1e-12 || o.l2 <= o.frobenius + 1e-12));
        assert!(StudyConfig { reps: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn small_autocov_and_ordering_studies() {
        let cfg = StudyConfig::new(10, 60, 1, 2, 4);
        let a = autocov_study(&cfg, 0.8, 5).unwrap();
        assert_eq!(a.lag0.len(), 2);
        assert!(a.lag0.iter().all(|e| e.banded_l1 <= e.sample_l1 + 1e-12 || e.r < 9));
        let o = ordering_study(&cfg, 10, 5).unwrap();
        assert_eq!(o.orderings.len(), 4);
        assert!(o.orderings.iter().all(|r| r.one_step.len() == 2));
    }
}
