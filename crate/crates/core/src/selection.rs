//! Bandwidth, order and ordering selection by information criteria.
//!
//! The marginal criterion of row `i` at bandwidth `k` and order `d` is
//!
//! ```text
//! BIC_i(k) = log RSS_i(k) + (1/n) d tau_i(k) C_n log(max(p, n))
//! ```
//!
//! and the selected bandwidth is the largest of the per-row minimisers. The
//! leading `d` duplicates the factor already inside `tau_i`; it is applied
//! as written and can be cancelled through [`BicConfig::penalty_multiplier`].
//! Equal criterion values resolve to the smaller bandwidth (and, over an
//! order grid, to the lexicographically smaller `(order, bandwidth)`).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{build_row_design, fit_row, rss_path, tau};
use crate::model::TimeSeries;

/// Default order-search bound.
pub const DEFAULT_MAX_ORDER: usize = 10;

/// Rule for the penalty constant `C_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyConstant {
    /// `log log n`.
    LogLog,
    Fixed(f64),
}

impl PenaltyConstant {
    pub fn value(self, n: usize) -> f64 {
        match self {
            PenaltyConstant::LogLog => (n as f64).ln().ln(),
            PenaltyConstant::Fixed(c) => c,
        }
    }
}

impl FromStr for PenaltyConstant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("loglog") {
            return Ok(PenaltyConstant::LogLog);
        }
        s.parse::<f64>()
            .ok()
            .filter(|c| c.is_finite() && *c >= 0.0)
            .map(PenaltyConstant::Fixed)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "C_n must be `loglog` or a non-negative number, got {s:?}"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicConfig {
    pub c_n: PenaltyConstant,
    /// Scales the marginal and order-grid penalties; `1/d` removes the
    /// duplicated order factor of the marginal criterion.
    pub penalty_multiplier: f64,
    /// Also consider `k = 0`.
    pub include_zero: bool,
}

impl Default for BicConfig {
    fn default() -> Self {
        Self {
            c_n: PenaltyConstant::LogLog,
            penalty_multiplier: 1.0,
            include_zero: false,
        }
    }
}

impl BicConfig {
    pub fn with_zero(mut self, include_zero: bool) -> Self {
        self.include_zero = include_zero;
        self
    }

    fn validate(&self, n: usize) -> Result<f64> {
        let c = self.c_n.value(n);
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty constant C_n = {c} (n = {n}) must be finite and non-negative"
            )));
        }
        if !self.penalty_multiplier.is_finite() || self.penalty_multiplier < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty multiplier {} must be finite and non-negative",
                self.penalty_multiplier
            )));
        }
        Ok(c)
    }

    fn k_grid(&self, k_max: usize) -> Vec<usize> {
        let start = if self.include_zero { 0 } else { 1 };
        (start..=k_max).collect()
    }
}

/// `floor(sqrt(n))`.
pub fn default_max_bandwidth(n: usize) -> usize {
    (n as f64).sqrt().floor() as usize
}

/// `(1/n) C_n log(max(p, n))`, the factor multiplying the parameter count.
fn unit_penalty(n: usize, p: usize, c_n: f64) -> f64 {
    c_n * (p.max(n) as f64).ln() / n as f64
}

/// Penalty term of the marginal criterion.
pub fn marginal_penalty(i: usize, k: usize, d: usize, p: usize, n: usize, cfg: &BicConfig) -> Result<f64> {
    let c_n = cfg.validate(n)?;
    Ok(cfg.penalty_multiplier * (d * tau(i, k, d, p)?) as f64 * unit_penalty(n, p, c_n))
}

/// `BIC_i(k)` for a single row, bandwidth and order.
pub fn marginal_bic(ts: &TimeSeries, i: usize, k: usize, d: usize, cfg: &BicConfig) -> Result<f64> {
    let design = build_row_design(ts, i, k, d)?;
    let rss = fit_row(&design)?.rss;
    if rss <= 0.0 {
        return Err(Error::ZeroRss { row: i, k });
    }
    Ok(rss.ln() + marginal_penalty(i, k, d, ts.p(), ts.n(), cfg)?)
}

/// Parameter count of the whole-model criterion:
/// `(2p + 1) k - k² - k`, times `d`.
pub fn joint_parameter_count(k: usize, p: usize, d: usize) -> usize {
    d * ((2 * p + 1) * k - k * k - k)
}

/// Criterion surfaces and the selected bandwidth (and order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub schema_version: u32,
    /// Candidate bandwidths, ascending.
    pub k_grid: Vec<usize>,
    /// Candidate orders, ascending; a single entry when the order is fixed.
    pub d_grid: Vec<usize>,
    /// `bic[i][o][c]`: row `i`, order `d_grid[o]`, bandwidth `k_grid[c]`.
    pub bic: Vec<Vec<Vec<f64>>>,
    pub argmin_k: Vec<usize>,
    pub argmin_d: Vec<usize>,
    pub k_hat: usize,
    /// Present when the order was selected.
    pub d_hat: Option<usize>,
    pub c_n: f64,
    pub k_max: usize,
    pub l_max: Option<usize>,
    pub penalty_multiplier: f64,
}

impl SelectionTrace {
    pub fn p(&self) -> usize {
        self.bic.len()
    }

    /// `BIC_i(k)` at the first (or only) order of the grid.
    pub fn bic_at(&self, i: usize, k: usize) -> Option<f64> {
        let c = self.k_grid.iter().position(|&g| g == k)?;
        self.bic.get(i).map(|r| r[0][c])
    }

    /// Per-row minimisers as CSV `row,k_hat_i,d_hat_i`.
    pub fn write_argmins_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,k_hat,d_hat")?;
        for (i, (k, d)) in self.argmin_k.iter().zip(&self.argmin_d).enumerate() {
            writeln!(w, "{i},{k},{d}")?;
        }
        Ok(())
    }
}

fn check_grid(ts: &TimeSeries, k_max: usize, cfg: &BicConfig) -> Result<()> {
    if k_max == 0 && !cfg.include_zero {
        return Err(Error::InvalidArgument(
            "the bandwidth search bound K must be at least 1".into(),
        ));
    }
    if k_max >= ts.p() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth search bound K = {k_max} must be below p = {}",
            ts.p()
        )));
    }
    Ok(())
}

/// Surface of one row over `k_grid` at order `d`.
fn row_surface(
    ts: &TimeSeries,
    i: usize,
    d: usize,
    k_grid: &[usize],
    unit: f64,
    lead: f64,
) -> Result<Vec<f64>> {
    let k_max = *k_grid.last().expect("non-empty grid");
    let rss = rss_path(ts, i, d, k_max)?;
    k_grid
        .iter()
        .map(|&k| {
            let r = rss[k];
            if r <= 0.0 {
                return Err(Error::ZeroRss { row: i, k });
            }
            Ok(r.ln() + lead * tau(i, k, d, ts.p())? as f64 * unit)
        })
        .collect()
}

/// Index of the first minimum.
fn first_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = c;
        }
    }
    best
}

/// Marginal selection at known order `d`: `k̂ = max_i argmin_k BIC_i(k)`
/// over `k = 1..=k_max` (or `0..=k_max` with `include_zero`).
pub fn select_bandwidth(ts: &TimeSeries, d: usize, k_max: usize, cfg: &BicConfig) -> Result<SelectionTrace> {
    check_grid(ts, k_max, cfg)?;
    let c_n = cfg.validate(ts.n())?;
    let k_grid = cfg.k_grid(k_max);
    let unit = unit_penalty(ts.n(), ts.p(), c_n);
    let lead = cfg.penalty_multiplier * d as f64;
    let surfaces = (0..ts.p())
        .into_par_iter()
        .map(|i| row_surface(ts, i, d, &k_grid, unit, lead).map_err(|e| e.in_row(i)))
        .collect::<Result<Vec<_>>>()?;
    let argmin_k: Vec<usize> = surfaces.iter().map(|s| k_grid[first_argmin(s)]).collect();
    let k_hat = *argmin_k.iter().max().expect("p >= 1");
    Ok(SelectionTrace {
        schema_version: crate::SCHEMA_VERSION,
        d_grid: vec![d],
        bic: surfaces.into_iter().map(|s| vec![s]).collect(),
        argmin_d: vec![d; ts.p()],
        argmin_k,
        k_hat,
        d_hat: None,
        c_n,
        k_max,
        l_max: None,
        penalty_multiplier: cfg.penalty_multiplier,
        k_grid,
    })
}

/// Joint bandwidth and order selection over `k ∈ grid(K)`, `l = 1..=L`,
/// with penalty `(1/n) tau_i(k, l) C_n log(max(p, n))`. Every order uses
/// its own estimation window `t = l..n`.
pub fn select_bandwidth_and_order(
    ts: &TimeSeries,
    k_max: usize,
    l_max: usize,
    cfg: &BicConfig,
) -> Result<SelectionTrace> {
    check_grid(ts, k_max, cfg)?;
    if l_max == 0 {
        return Err(Error::InvalidArgument("the order search bound L must be at least 1".into()));
    }
    let c_n = cfg.validate(ts.n())?;
    let k_grid = cfg.k_grid(k_max);
    let d_grid: Vec<usize> = (1..=l_max).collect();
    let unit = unit_penalty(ts.n(), ts.p(), c_n);
    let surfaces = (0..ts.p())
        .into_par_iter()
        .map(|i| {
            d_grid
                .iter()
                .map(|&l| row_surface(ts, i, l, &k_grid, unit, cfg.penalty_multiplier))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_row(i))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmin_k = Vec::with_capacity(ts.p());
    let mut argmin_d = Vec::with_capacity(ts.p());
    for s in &surfaces {
        // orders outer, bandwidths inner: the first minimum is the
        // lexicographically smallest (l, k)
        let flat: Vec<f64> = s.iter().flatten().copied().collect();
        let best = first_argmin(&flat);
        argmin_d.push(d_grid[best / k_grid.len()]);
        argmin_k.push(k_grid[best % k_grid.len()]);
    }
    let k_hat = *argmin_k.iter().max().expect("p >= 1");
    let d_hat = *argmin_d.iter().max().expect("p >= 1");
    Ok(SelectionTrace {
        schema_version: crate::SCHEMA_VERSION,
        k_grid,
        d_grid,
        bic: surfaces,
        argmin_k,
        argmin_d,
        k_hat,
        d_hat: Some(d_hat),
        c_n,
        k_max,
        l_max: Some(l_max),
        penalty_multiplier: cfg.penalty_multiplier,
    })
}

/// Whole-model criterion values and their minimiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSelection {
    pub k_grid: Vec<usize>,
    /// `Σ_i log RSS_i(k) + (1/n) τ̃(k) C_n log(max(p, n))` per grid point.
    pub scores: Vec<f64>,
    pub k_tilde: usize,
}

/// Whole-model selection `k̃ = argmin_k Σ_i log RSS_i(k) + (1/n) τ̃(k) C_n
/// log(max(p, n))` with `τ̃` from [`joint_parameter_count`].
pub fn joint_bic_select(ts: &TimeSeries, d: usize, k_max: usize, cfg: &BicConfig) -> Result<JointSelection> {
    check_grid(ts, k_max, cfg)?;
    let c_n = cfg.validate(ts.n())?;
    let k_grid = cfg.k_grid(k_max);
    let paths = (0..ts.p())
        .into_par_iter()
        .map(|i| rss_path(ts, i, d, k_max).map_err(|e| e.in_row(i)))
        .collect::<Result<Vec<_>>>()?;
    let unit = unit_penalty(ts.n(), ts.p(), c_n);
    let scores = k_grid
        .iter()
        .map(|&k| {
            let mut sum = 0.0;
            for (i, path) in paths.iter().enumerate() {
                if path[k] <= 0.0 {
                    return Err(Error::ZeroRss { row: i, k });
                }
                sum += path[k].ln();
            }
            Ok(sum + joint_parameter_count(k, ts.p(), d) as f64 * unit)
        })
        .collect::<Result<Vec<_>>>()?;
    let k_tilde = k_grid[first_argmin(&scores)];
    Ok(JointSelection {
        k_grid,
        scores,
        k_tilde,
    })
}

/// Criterion total of one ordering of the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingScore {
    /// `Σ_i BIC_i(k̂)`.
    pub bic_sum: f64,
    pub k_hat: usize,
}

/// Reorders the series by `perm` (new series `m` is old series `perm[m]`),
/// selects the bandwidth and sums the row criteria at `k̂`.
pub fn ordering_score(
    ts: &TimeSeries,
    perm: &[usize],
    d: usize,
    k_max: usize,
    cfg: &BicConfig,
) -> Result<OrderingScore> {
    let permuted = ts.permuted(perm)?;
    let trace = select_bandwidth(&permuted, d, k_max, cfg)?;
    let c = trace
        .k_grid
        .iter()
        .position(|&k| k == trace.k_hat)
        .expect("k_hat is on the grid");
    Ok(OrderingScore {
        bic_sum: trace.bic.iter().map(|r| r[0][c]).sum(),
        k_hat: trace.k_hat,
    })
}

/// Rule producing an ordering from planar coordinates `(x, y)`, read as
/// (longitude, latitude).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingStrategy {
    /// North to south: `y` descending.
    NorthSouth,
    /// West to east: `x` ascending.
    WestEast,
    /// Northwest to southeast: `x - y` ascending.
    NorthwestSoutheast,
    /// Southwest to northeast: `x + y` ascending.
    SouthwestNortheast,
    /// Distance to the given series, ascending.
    Anchor(usize),
}

impl fmt::Display for OrderingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingStrategy::NorthSouth => write!(f, "ns"),
            OrderingStrategy::WestEast => write!(f, "we"),
            OrderingStrategy::NorthwestSoutheast => write!(f, "nwse"),
            OrderingStrategy::SouthwestNortheast => write!(f, "swne"),
            OrderingStrategy::Anchor(a) => write!(f, "anchor:{a}"),
        }
    }
}

impl FromStr for OrderingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "ns" => Ok(OrderingStrategy::NorthSouth),
            "we" => Ok(OrderingStrategy::WestEast),
            "nwse" => Ok(OrderingStrategy::NorthwestSoutheast),
            "swne" => Ok(OrderingStrategy::SouthwestNortheast),
            _ => s
                .strip_prefix("anchor:")
                .and_then(|a| a.parse().ok())
                .map(OrderingStrategy::Anchor)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown ordering strategy {s:?}"))),
        }
    }
}

type SortKey = Box<dyn Fn(&(f64, f64)) -> f64>;

/// One permutation per strategy; equal keys keep index order.
pub fn ordering_candidates(
    coords: &[(f64, f64)],
    strategies: &[OrderingStrategy],
) -> Result<Vec<(OrderingStrategy, Vec<usize>)>> {
    if coords.is_empty() {
        return Err(Error::InvalidArgument("ordering strategies need coordinates".into()));
    }
    strategies
        .iter()
        .map(|&s| {
            let key: SortKey = match s {
                OrderingStrategy::NorthSouth => Box::new(|&(_, y)| -y),
                OrderingStrategy::WestEast => Box::new(|&(x, _)| x),
                OrderingStrategy::NorthwestSoutheast => Box::new(|&(x, y)| x - y),
                OrderingStrategy::SouthwestNortheast => Box::new(|&(x, y)| x + y),
                OrderingStrategy::Anchor(a) => {
                    let &(ax, ay) = coords.get(a).ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "anchor {a} outside 0..{}",
                            coords.len()
                        ))
                    })?;
                    Box::new(move |&(x, y)| (x - ax).hypot(y - ay))
                }
            };
            let keys: Vec<f64> = coords.iter().map(key.as_ref()).collect();
            let mut perm: Vec<usize> = (0..coords.len()).collect();
            perm.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
            Ok((s, perm))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BandedMatrix;
    use crate::model::BandedVarModel;
    use crate::rng::SeedStream;
    use crate::simulate::{gen_coeff_uniform, simulate_var};

    fn simulated(p: usize, n: usize, k0: usize, seed: u64) -> TimeSeries {
        let s = SeedStream::new(seed);
        let a = gen_coeff_uniform(p, k0, &mut s.substream("coeffs").rng()).unwrap();
        let m = BandedVarModel::new(vec![a], k0, None).unwrap();
        simulate_var(&m, n, 200, &mut s.substream("innovations").rng()).unwrap()
    }

    #[test]
    fn penalty_arithmetic() {
        let cfg = BicConfig::default();
        let pen = marginal_penalty(50, 2, 1, 100, 200, &cfg).unwrap();
        let l = 200f64.ln();
        let expected = 5.0 * l.ln() * l / 200.0;
        assert!((pen - expected).abs() < 1e-15);
        assert!((pen - 0.2208).abs() < 1e-4);
        // printed leading order factor
        let pen2 = marginal_penalty(50, 2, 2, 100, 200, &cfg).unwrap();
        assert!((pen2 - 4.0 * pen).abs() < 1e-12);
        let half = BicConfig {
            penalty_multiplier: 0.5,
            ..cfg
        };
        assert!((marginal_penalty(50, 2, 2, 100, 200, &half).unwrap() - 2.0 * pen).abs() < 1e-12);
    }

    #[test]
    fn joint_parameter_count_values() {
        assert_eq!(joint_parameter_count(2, 100, 1), 396);
        assert_eq!(joint_parameter_count(0, 100, 1), 0);
        // one extra diagonal pair per step
        for k in 0..99 {
            assert!(joint_parameter_count(k + 1, 100, 1) > joint_parameter_count(k, 100, 1));
        }
    }

    #[test]
    fn penalty_constant_parsing() {
        assert_eq!("loglog".parse::<PenaltyConstant>().unwrap(), PenaltyConstant::LogLog);
        assert_eq!("2.5".parse::<PenaltyConstant>().unwrap(), PenaltyConstant::Fixed(2.5));
        assert!("-1".parse::<PenaltyConstant>().is_err());
        assert!("fast".parse::<PenaltyConstant>().is_err());
    }

    #[test]
    fn trace_matches_pointwise_criterion() {
        let ts = simulated(12, 120, 1, 3);
        let cfg = BicConfig::default().with_zero(true);
        let trace = select_bandwidth(&ts, 1, 3, &cfg).unwrap();
        assert_eq!(trace.k_grid, vec![0, 1, 2, 3]);
        for i in 0..12 {
            for k in 0..=3 {
                let direct = marginal_bic(&ts, i, k, 1, &cfg).unwrap();
                assert!((trace.bic_at(i, k).unwrap() - direct).abs() < 1e-10);
            }
        }
        assert_eq!(trace.k_hat, *trace.argmin_k.iter().max().unwrap());
    }

    #[test]
    fn equal_rss_prefers_smallest_bandwidth() {
        assert_eq!(first_argmin(&[1.0, 0.5, 0.5, 0.7]), 1);
        assert_eq!(first_argmin(&[2.0, 2.0]), 0);
    }

    #[test]
    fn order_grid_with_single_order_matches_marginal() {
        let ts = simulated(10, 150, 1, 8);
        let cfg = BicConfig::default();
        let a = select_bandwidth(&ts, 1, 3, &cfg).unwrap();
        let b = select_bandwidth_and_order(&ts, 3, 1, &cfg).unwrap();
        assert_eq!(a.bic, b.bic);
        assert_eq!(a.argmin_k, b.argmin_k);
        assert_eq!(b.d_hat, Some(1));
    }

    #[test]
    fn search_bounds_are_checked() {
        let ts = simulated(6, 80, 1, 1);
        let cfg = BicConfig::default();
        assert!(select_bandwidth(&ts, 1, 0, &cfg).is_err());
        assert!(select_bandwidth(&ts, 1, 6, &cfg).is_err());
        assert!(select_bandwidth_and_order(&ts, 2, 0, &cfg).is_err());
        let short = simulated(6, 7, 1, 1);
        assert!(matches!(
            select_bandwidth(&short, 1, 5, &cfg),
            Err(Error::Row { .. })
        ));
    }

    #[test]
    fn zero_rss_is_reported() {
        // an exact VAR(1) with no noise: the lag design reproduces y exactly
        let a = BandedMatrix::identity(3).unwrap().scale(0.5);
        let mut obs = vec![vec![1.0, -2.0, 3.0]];
        for t in 1..30 {
            let prev: Vec<f64> = obs[t - 1].clone();
            obs.push(a.matvec(&prev).unwrap());
        }
        let ts = TimeSeries::from_observations(&obs).unwrap();
        let err = marginal_bic(&ts, 0, 0, 1, &BicConfig::default());
        assert!(
            matches!(err, Err(Error::ZeroRss { .. })) || err.as_ref().is_ok_and(|v| *v < -40.0),
            "{err:?}"
        );
    }

    #[test]
    fn reversal_leaves_score_unchanged() {
        let ts = simulated(15, 150, 2, 5);
        let cfg = BicConfig::default();
        let id: Vec<usize> = (0..15).collect();
        let rev: Vec<usize> = (0..15).rev().collect();
        let a = ordering_score(&ts, &id, 1, 4, &cfg).unwrap();
        let b = ordering_score(&ts, &rev, 1, 4, &cfg).unwrap();
        assert_eq!(a.k_hat, b.k_hat);
        assert!((a.bic_sum - b.bic_sum).abs() < 1e-9);
        assert!(ordering_score(&ts, &[0, 0, 1], 1, 4, &cfg).is_err());
    }

    #[test]
    fn candidate_orderings() {
        let vertical = [(0.0, 1.0), (0.0, 3.0), (0.0, 2.0)];
        let c = ordering_candidates(&vertical, &[OrderingStrategy::NorthSouth]).unwrap();
        assert_eq!(c[0].1, vec![1, 2, 0]);

        let line = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
        let c = ordering_candidates(&line, &[OrderingStrategy::Anchor(0), OrderingStrategy::WestEast])
            .unwrap();
        assert_eq!(c[0].1, vec![0, 1, 2, 3]);
        assert_eq!(c[1].1, vec![0, 1, 2, 3]);

        let diag = [(2.0, 2.0), (0.0, 0.0), (1.0, 1.0)];
        let c = ordering_candidates(
            &diag,
            &[OrderingStrategy::NorthwestSoutheast, OrderingStrategy::SouthwestNortheast],
        )
        .unwrap();
        // all on the x = y line: equal NW-SE keys keep index order
        assert_eq!(c[0].1, vec![0, 1, 2]);
        assert_eq!(c[1].1, vec![1, 2, 0]);

        assert!(ordering_candidates(&[], &[OrderingStrategy::NorthSouth]).is_err());
        assert!(ordering_candidates(&line, &[OrderingStrategy::Anchor(9)]).is_err());
    }

    #[test]
    fn strategy_strings_round_trip() {
        for s in ["ns", "we", "nwse", "swne", "anchor:3"] {
            assert_eq!(s.parse::<OrderingStrategy>().unwrap().to_string(), s);
        }
        assert!("up".parse::<OrderingStrategy>().is_err());
    }

    #[test]
    fn argmin_csv_layout() {
        let ts = simulated(5, 60, 1, 2);
        let trace = select_bandwidth(&ts, 1, 2, &BicConfig::default()).unwrap();
        let mut buf = Vec::new();
        trace.write_argmins_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("row,k_hat,d_hat\n0,"));
    }
}
