//! Iterated plug-in forecasts, post-sample evaluation and seasonal
//! adjustment.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::fit_banded_var;
use crate::linalg::DenseMatrix;
use crate::model::{BandedVarModel, TimeSeries};
use crate::selection::{default_max_bandwidth, select_bandwidth, BicConfig};

/// `h` iterated forecasts from the end of `history`, as a `p x h` matrix
/// whose column `s` predicts `y_{T+s+1}`. A stored mean is removed before
/// the recursion and added back to every prediction.
pub fn predict(model: &BandedVarModel, history: &TimeSeries, h: usize) -> Result<DenseMatrix> {
    let (p, d) = (model.p(), model.d());
    if history.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "history has {} series, model has {p}",
            history.p()
        )));
    }
    if history.n() < d {
        return Err(Error::InsufficientLength {
            required: d,
            actual: history.n(),
        });
    }
    let mean = |i: usize| model.mean().map_or(0.0, |m| m[i]);
    // most recent first
    let mut recent: Vec<Vec<f64>> = (0..d)
        .map(|l| {
            let t = history.n() - 1 - l;
            (0..p).map(|i| history.get(i, t) - mean(i)).collect()
        })
        .collect();
    let mut out = DenseMatrix::zeros(p, h);
    let mut tmp = vec![0.0; p];
    for s in 0..h {
        let mut next = vec![0.0; p];
        for (a, past) in model.coeffs().iter().zip(&recent) {
            a.matvec_into(past, &mut tmp);
            for (x, v) in next.iter_mut().zip(&tmp) {
                *x += v;
            }
        }
        for (i, v) in next.iter().enumerate() {
            out[(i, s)] = v + mean(i);
        }
        recent.rotate_right(1);
        recent[0] = next;
    }
    Ok(out)
}

/// Error functional of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Absolute,
    Squared,
}

impl Metric {
    fn apply(self, e: f64) -> f64 {
        match self {
            Metric::Absolute => e.abs(),
            Metric::Squared => e * e,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(Metric::Absolute),
            "squared" | "sq" => Ok(Metric::Squared),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        }
    }
}

/// Where the forecasting model comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FitSpec {
    /// A given model, never refitted.
    Fixed(BandedVarModel),
    /// Least squares on the training window.
    Estimate {
        /// Bandwidth; selected by the marginal criterion when `None`.
        k: Option<usize>,
        d: usize,
        /// Search bound for the selection; `floor(sqrt(n))` capped at
        /// `p - 1` when `None`.
        k_max: Option<usize>,
        bic: BicConfig,
        demean: bool,
    },
}

impl FitSpec {
    /// Fitted model and the bandwidth used.
    pub fn fit(&self, train: &TimeSeries) -> Result<BandedVarModel> {
        match self {
            FitSpec::Fixed(m) => Ok(m.clone()),
            FitSpec::Estimate {
                k,
                d,
                k_max,
                bic,
                demean,
            } => {
                let k = match k {
                    Some(k) => *k,
                    None => {
                        let bound = k_max
                            .unwrap_or_else(|| default_max_bandwidth(train.n()))
                            .min(train.p().saturating_sub(1));
                        let data = if *demean { train.demeaned().0 } else { train.clone() };
                        select_bandwidth(&data, *d, bound, bic)?.k_hat
                    }
                };
                Ok(fit_banded_var(train, k, *d, *demean)?.model)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvaluationOptions {
    /// Refit at every origin instead of once on the initial window.
    pub refit: bool,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub horizon: usize,
    pub mean: f64,
    /// Sample standard deviation over (series, origin) pairs.
    pub sd: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub schema_version: u32,
    pub h_max: usize,
    pub metric: Metric,
    /// Index of the last observation used at each origin.
    pub origins: Vec<usize>,
    /// `p x h_max` predictions per origin.
    pub predictions: Vec<DenseMatrix>,
    /// `errors[s][o][i]`: horizon `s + 1`, origin `o`, series `i`; only
    /// origins whose target lies inside the sample are present.
    pub errors: Vec<Vec<Vec<f64>>>,
    pub summary: Vec<HorizonSummary>,
    /// Bandwidth of the (first) fitted model.
    pub k: usize,
    pub d: usize,
}

impl ForecastReport {
    /// Long-format CSV `origin,horizon,series,error`.
    pub fn write_errors_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "origin,horizon,series,error")?;
        for (s, per_origin) in self.errors.iter().enumerate() {
            for (o, errs) in per_origin.iter().enumerate() {
                for (i, e) in errs.iter().enumerate() {
                    writeln!(w, "{},{},{},{}", self.origins[o], s + 1, i, crate::io::format_f64(*e))?;
                }
            }
        }
        Ok(())
    }
}

fn summarise(horizon: usize, values: impl Iterator<Item = f64> + Clone) -> HorizonSummary {
    let count = values.clone().count();
    let mean = values.clone().sum::<f64>() / count as f64;
    let sd = if count > 1 {
        (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    HorizonSummary {
        horizon,
        mean,
        sd,
        count,
    }
}

/// Post-sample evaluation over the last `holdout` observations.
///
/// Origins run from `n - holdout - 1` to `n - 2`, so every held-out point
/// is forecast one step ahead. The model is fitted on `y_0..=y_{n-holdout-1}`
/// once, or on `y_0..=y_o` at each origin `o` with `refit`.
pub fn rolling_evaluation(
    ts: &TimeSeries,
    spec: &FitSpec,
    holdout: usize,
    h_max: usize,
    opts: EvaluationOptions,
) -> Result<ForecastReport> {
    let n = ts.n();
    if holdout == 0 || h_max == 0 {
        return Err(Error::InvalidArgument("holdout and horizon must be positive".into()));
    }
    if holdout + 2 > n {
        return Err(Error::InsufficientLength {
            required: holdout + 2,
            actual: n,
        });
    }
    let train_end = n - holdout;
    let origins: Vec<usize> = (train_end - 1..n - 1).collect();
    let initial = spec.fit(&ts.slice(0..train_end)?)?;
    let models: Vec<BandedVarModel> = if opts.refit {
        origins
            .par_iter()
            .map(|&o| spec.fit(&ts.slice(0..o + 1)?))
            .collect::<Result<_>>()?
    } else {
        vec![initial.clone(); origins.len()]
    };
    let predictions = origins
        .par_iter()
        .zip(&models)
        .map(|(&o, m)| predict(m, &ts.slice(0..o + 1)?, h_max))
        .collect::<Result<Vec<_>>>()?;
    let p = ts.p();
    let mut errors = vec![Vec::new(); h_max];
    for (s, errs) in errors.iter_mut().enumerate() {
        for (&o, pred) in origins.iter().zip(&predictions) {
            let target = o + s + 1;
            if target >= n {
                break;
            }
            errs.push(
                (0..p)
                    .map(|i| opts.metric.apply(ts.get(i, target) - pred[(i, s)]))
                    .collect::<Vec<_>>(),
            );
        }
    }
    let summary = errors
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_empty())
        .map(|(s, e)| summarise(s + 1, e.iter().flatten().copied()))
        .collect();
    Ok(ForecastReport {
        schema_version: crate::SCHEMA_VERSION,
        h_max,
        metric: opts.metric,
        origins,
        predictions,
        errors,
        summary,
        k: initial.k0(),
        d: initial.d(),
    })
}

/// Per-phase means removed by [`deseasonalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalTable {
    pub period: usize,
    /// `p x period`; column `s` is the mean over `t ≡ s (mod period)`.
    pub table: DenseMatrix,
}

impl SeasonalTable {
    /// Seasonal component at absolute time index `t`.
    pub fn at(&self, t: usize) -> Vec<f64> {
        self.table.column(t % self.period)
    }

    /// Adds the seasonal component back to a series whose first observation
    /// sits at absolute time index `offset`.
    pub fn restore(&self, ts: &TimeSeries, offset: usize) -> Result<TimeSeries> {
        if ts.p() != self.table.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} series against a seasonal table for {}",
                ts.p(),
                self.table.rows()
            )));
        }
        let mut values = ts.values().clone();
        for t in 0..ts.n() {
            let s = (offset + t) % self.period;
            for i in 0..ts.p() {
                values[(i, t)] += self.table[(i, s)];
            }
        }
        Ok(ts.with_values(values))
    }
}

/// Subtracts per-phase means over a fixed `period`.
pub fn deseasonalize(ts: &TimeSeries, period: usize) -> Result<(TimeSeries, SeasonalTable)> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if ts.n() < period {
        return Err(Error::InsufficientLength {
            required: period,
            actual: ts.n(),
        });
    }
    let p = ts.p();
    let mut table = DenseMatrix::zeros(p, period);
    let mut counts = vec![0usize; period];
    for t in 0..ts.n() {
        counts[t % period] += 1;
    }
    for i in 0..p {
        for (t, v) in ts.series(i).iter().enumerate() {
            table[(i, t % period)] += v;
        }
        for s in 0..period {
            table[(i, s)] /= counts[s] as f64;
        }
    }
    let mut values = ts.values().clone();
    for t in 0..ts.n() {
        for i in 0..p {
            values[(i, t)] -= table[(i, t % period)];
        }
    }
    Ok((ts.with_values(values), SeasonalTable { period, table }))
}
