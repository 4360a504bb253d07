//! Row-wise least-squares estimation of banded VAR coefficients.
//!
//! Row `i` of the VAR is the regression of `y_{i,t}` on the lagged values of
//! the series inside the band, `y_{j,t-l}` for `|i - j| <= k` and
//! `l = 1..=d`, over the observations `t = d..n`. Rows share no state and are
//! fitted independently (in parallel).
//!
//! Design columns are ordered lag-major, series ascending within a lag.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, BandedMatrix, DenseMatrix, Qr};
use crate::model::{BandedVarModel, TimeSeries};

/// Number of regressors of row `i` (0-based) at bandwidth `k`, order `d`:
/// `d` times the number of series `j` with `|i - j| <= k`.
pub fn tau(i: usize, k: usize, d: usize, p: usize) -> Result<usize> {
    if p == 0 || i >= p {
        return Err(Error::InvalidArgument(format!("row {i} outside 0..{p}")));
    }
    if k >= p {
        return Err(Error::InvalidArgument(format!(
            "bandwidth parameter {k} must be below the dimension {p}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("order d must be at least 1".into()));
    }
    let (lo, hi) = band_span(i, k, p);
    Ok(d * (hi - lo + 1))
}

#[inline]
fn band_span(i: usize, k: usize, p: usize) -> (usize, usize) {
    (i.saturating_sub(k), (i + k).min(p - 1))
}

/// Minimum series length for row designs with `tau` regressors at order `d`.
fn required_length(tau: usize, d: usize) -> usize {
    d + tau + 1
}

/// Regression problem for one row of the VAR.
#[derive(Debug, Clone)]
pub struct RowDesign {
    pub row: usize,
    pub k: usize,
    pub d: usize,
    /// `(n - d) x tau` design.
    pub x: DenseMatrix,
    /// `(y_{i,d}, ..., y_{i,n-1})`.
    pub y: Vec<f64>,
    /// `(lag, series)` source of each design column; lags are 1-based.
    pub col_map: Vec<(usize, usize)>,
}

/// Column sources of row `i`: lag-major, series ascending.
pub fn column_map(i: usize, k: usize, d: usize, p: usize) -> Result<Vec<(usize, usize)>> {
    tau(i, k, d, p)?;
    let (lo, hi) = band_span(i, k, p);
    Ok((1..=d)
        .flat_map(|lag| (lo..=hi).map(move |j| (lag, j)))
        .collect())
}

pub fn build_row_design(ts: &TimeSeries, i: usize, k: usize, d: usize) -> Result<RowDesign> {
    let (p, n) = (ts.p(), ts.n());
    let col_map = column_map(i, k, d, p)?;
    let required = required_length(col_map.len(), d);
    if n < required {
        return Err(Error::InsufficientLength {
            required,
            actual: n,
        });
    }
    let rows = n - d;
    let x = DenseMatrix::from_fn(rows, col_map.len(), |r, c| {
        let (lag, j) = col_map[c];
        ts.get(j, r + d - lag)
    });
    let y = ts.series(i)[d..].to_vec();
    Ok(RowDesign {
        row: i,
        k,
        d,
        x,
        y,
        col_map,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowFit {
    pub beta: Vec<f64>,
    pub rss: f64,
}

/// Least-squares fit of one row; RSS from the explicit residuals.
pub fn fit_row(design: &RowDesign) -> Result<RowFit> {
    let qr = Qr::factor(&design.x)?;
    let qty = qr.apply_qt(&design.y)?;
    let beta = qr.solve_prefix(&qty, design.x.cols())?;
    let fitted = design.x.matvec(&beta)?;
    let rss = design
        .y
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    Ok(RowFit { beta, rss })
}

/// Result of fitting every row at a common `(k, d)`.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub k: usize,
    pub d: usize,
    pub model: BandedVarModel,
    /// `RSS_i` per row.
    pub rss: Vec<f64>,
    /// Row coefficient vectors, ordered as `col_maps`.
    pub betas: Vec<Vec<f64>>,
    pub col_maps: Vec<Vec<(usize, usize)>>,
    /// `RSS_i / (n - d)`.
    pub sigma_hat: Vec<f64>,
    /// Per-series means subtracted before fitting, when demeaning was requested.
    pub means: Option<Vec<f64>>,
}

type RowOutcome = (RowFit, Vec<(usize, usize)>);

/// Fits all `p` rows at bandwidth `k` and order `d` and assembles `A_1..A_d`.
///
/// With `demean`, each series is centred at its sample mean first and the
/// means are stored in the model.
pub fn fit_banded_var(ts: &TimeSeries, k: usize, d: usize, demean: bool) -> Result<FitReport> {
    let (centred, means) = if demean {
        let (c, m) = ts.demeaned();
        (c, Some(m))
    } else {
        (ts.clone(), None)
    };
    let data = &centred;
    let p = data.p();
    let fits: Vec<Result<RowOutcome>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let design = build_row_design(data, i, k, d)?;
            let fit = fit_row(&design)?;
            Ok((fit, design.col_map))
        })
        .collect();

    let mut singular = Vec::new();
    let mut rows = Vec::with_capacity(p);
    for (i, f) in fits.into_iter().enumerate() {
        match f {
            Ok(v) => rows.push(v),
            Err(Error::SingularDesign { .. }) => singular.push(i),
            Err(e) => return Err(e.in_row(i)),
        }
    }
    if !singular.is_empty() {
        return Err(Error::SingularRows { rows: singular });
    }

    let (fits, col_maps): (Vec<RowFit>, Vec<_>) = rows.into_iter().unzip();
    let betas: Vec<Vec<f64>> = fits.iter().map(|f| f.beta.clone()).collect();
    let rss: Vec<f64> = fits.iter().map(|f| f.rss).collect();
    let coeffs = assemble_coeffs(p, k, d, &betas, &col_maps)?;
    let mut model = BandedVarModel::new(coeffs, k, None)?;
    if let Some(m) = &means {
        model = model.with_mean(m.clone())?;
    }
    let denom = (data.n() - d) as f64;
    Ok(FitReport {
        schema_version: crate::SCHEMA_VERSION,
        k,
        d,
        model,
        sigma_hat: rss.iter().map(|r| r / denom).collect(),
        rss,
        betas,
        col_maps,
        means,
    })
}

/// Scatters row coefficient vectors into `A_1, ..., A_d`.
pub fn assemble_coeffs(
    p: usize,
    k: usize,
    d: usize,
    betas: &[Vec<f64>],
    col_maps: &[Vec<(usize, usize)>],
) -> Result<Vec<BandedMatrix>> {
    if betas.len() != p || col_maps.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficient rows for dimension {p}",
            betas.len()
        )));
    }
    let mut coeffs = vec![BandedMatrix::zeros(p, k)?; d];
    for (i, (beta, map)) in betas.iter().zip(col_maps).enumerate() {
        if beta.len() != map.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {i}: {} coefficients for {} columns",
                beta.len(),
                map.len()
            )));
        }
        for (&b, &(lag, j)) in beta.iter().zip(map) {
            if lag == 0 || lag > d {
                return Err(Error::InvalidArgument(format!("row {i}: lag {lag} outside 1..={d}")));
            }
            coeffs[lag - 1].set(i, j, b)?;
        }
    }
    Ok(coeffs)
}

/// Coefficients of row `i` of `model` in the design order of `(k, d)`.
pub fn extract_row_coefficients(model: &BandedVarModel, i: usize, k: usize) -> Result<Vec<f64>> {
    let map = column_map(i, k, model.d(), model.p())?;
    Ok(map
        .iter()
        .map(|&(lag, j)| model.coeffs()[lag - 1].get(i, j))
        .collect())
}

/// `RSS_i(k)` of row `i` at order `d` for every `k` in `0..=k_max`.
///
/// One QR factorisation of the widest design serves all bandwidths: columns
/// are ordered by ring `|i - j|` so each narrower design is a leading block.
/// Values agree with [`fit_row`] on the corresponding design.
pub fn rss_path(ts: &TimeSeries, i: usize, d: usize, k_max: usize) -> Result<Vec<f64>> {
    let (p, n) = (ts.p(), ts.n());
    let width = tau(i, k_max, d, p)?;
    let required = required_length(width, d);
    if n < required {
        return Err(Error::InsufficientLength {
            required,
            actual: n,
        });
    }
    let rows = n - d;
    let mut columns = Vec::with_capacity(width);
    let mut prefix = Vec::with_capacity(k_max + 1);
    for ring in 0..=k_max {
        let mut sources = Vec::with_capacity(2);
        if ring == 0 {
            sources.push(i);
        } else {
            if i >= ring {
                sources.push(i - ring);
            }
            if i + ring < p {
                sources.push(i + ring);
            }
        }
        for lag in 1..=d {
            for &j in &sources {
                columns.push(ts.series(j)[d - lag..n - lag].to_vec());
            }
        }
        prefix.push(columns.len());
    }
    let y = &ts.series(i)[d..];
    let qr = Qr::factor_columns(rows, columns)?;
    qr.check_rank(width)?;
    let qty = qr.apply_qt(y)?;
    let nested = qr.nested_rss(&qty);
    Ok(prefix.into_iter().map(|m| nested[m]).collect())
}

/// Residual vector `y - X beta` of a design.
pub fn residuals(design: &RowDesign, beta: &[f64]) -> Result<Vec<f64>> {
    let fitted = design.x.matvec(beta)?;
    Ok(design.y.iter().zip(fitted).map(|(y, f)| y - f).collect())
}

/// `‖r‖²`.
pub fn sum_of_squares(r: &[f64]) -> f64 {
    dot(r, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts_from_fn(p: usize, n: usize, f: impl Fn(usize, usize) -> f64) -> TimeSeries {
        TimeSeries::new(DenseMatrix::from_fn(p, n, f)).unwrap()
    }

    fn pseudo(i: usize, t: usize) -> f64 {
        // cheap deterministic, non-degenerate values
        ((i * 131 + t * 71 + (i * t) % 17) as f64 * 0.618_034).fract() - 0.5
    }

    #[test]
    fn tau_matches_boundary_formula() {
        // 0-based rows; row 0 is the first boundary row.
        assert_eq!(tau(0, 2, 1, 10).unwrap(), 3);
        assert_eq!(tau(4, 2, 1, 10).unwrap(), 5);
        assert_eq!(tau(1, 2, 3, 10).unwrap(), 12);
        for p in [7usize, 10, 25] {
            for k in 0..p / 2 {
                for d in 1..=3 {
                    for i in 0..p {
                        let one_based = i + 1;
                        let expected = if one_based > k && one_based <= p - k {
                            (2 * k + 1) * d
                        } else if one_based <= k {
                            let j = k + 1 - one_based;
                            (2 * k + 1 - j) * d
                        } else {
                            let j = one_based - (p - k);
                            (2 * k + 1 - j) * d
                        };
                        assert_eq!(tau(i, k, d, p).unwrap(), expected, "p={p} k={k} d={d} i={i}");
                    }
                }
            }
        }
        assert!(tau(10, 2, 1, 10).is_err());
        assert!(tau(0, 10, 1, 10).is_err());
        assert!(tau(0, 1, 0, 10).is_err());
    }

    #[test]
    fn scalar_ar1_design() {
        let ts = ts_from_fn(1, 6, |_, t| t as f64);
        let design = build_row_design(&ts, 0, 0, 1).unwrap();
        assert_eq!(design.x.column(0), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(design.y, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn interior_design_columns() {
        let ts = ts_from_fn(3, 8, |i, t| (10 * i + t) as f64);
        let design = build_row_design(&ts, 1, 1, 1).unwrap();
        assert_eq!(design.col_map, vec![(1, 0), (1, 1), (1, 2)]);
        assert_eq!(design.x.row(0), &[0.0, 10.0, 20.0]);
        assert_eq!(design.y[0], 11.0);
    }

    #[test]
    fn boundary_design_two_lags() {
        let ts = ts_from_fn(3, 9, |i, t| (10 * i + t) as f64);
        let design = build_row_design(&ts, 0, 1, 2).unwrap();
        assert_eq!(design.col_map, vec![(1, 0), (1, 1), (2, 0), (2, 1)]);
        // first response is y_{0,2}; regressors y_{.,1} then y_{.,0}
        assert_eq!(design.y[0], 2.0);
        assert_eq!(design.x.row(0), &[1.0, 11.0, 0.0, 10.0]);
    }

    #[test]
    fn short_series_reports_minimum() {
        let ts = ts_from_fn(3, 4, pseudo);
        match build_row_design(&ts, 1, 1, 1) {
            Err(Error::InsufficientLength { required, actual }) => {
                assert_eq!((required, actual), (5, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exact_linear_row_is_recovered() {
        let ts = ts_from_fn(4, 30, pseudo);
        let mut design = build_row_design(&ts, 1, 1, 2).unwrap();
        let truth: Vec<f64> = (0..design.x.cols()).map(|c| 0.3 - 0.1 * c as f64).collect();
        design.y = design.x.matvec(&truth).unwrap();
        let fit = fit_row(&design).unwrap();
        for (b, t) in fit.beta.iter().zip(&truth) {
            assert!((b - t).abs() < 1e-8);
        }
        assert!(fit.rss <= 1e-12 * sum_of_squares(&design.y));
    }

    #[test]
    fn orthogonal_response_gives_zero_beta() {
        // x has columns e_0, e_1 (padded); y lives on e_2, e_3
        let ts = ts_from_fn(1, 6, |_, t| t as f64);
        let mut design = build_row_design(&ts, 0, 0, 1).unwrap();
        design.x = DenseMatrix::from_fn(5, 2, |r, c| if r == c { 1.0 } else { 0.0 });
        design.y = vec![0.0, 0.0, 3.0, 4.0, 0.0];
        let fit = fit_row(&design).unwrap();
        assert!(fit.beta.iter().all(|b| b.abs() < 1e-14));
        assert!((fit.rss - 25.0).abs() < 1e-12);
    }

    #[test]
    fn rss_path_matches_separate_fits() {
        let ts = ts_from_fn(7, 40, pseudo);
        for d in 1..=2 {
            for i in [0usize, 3, 6] {
                let path = rss_path(&ts, i, d, 4).unwrap();
                for (k, &r) in path.iter().enumerate() {
                    let direct = fit_row(&build_row_design(&ts, i, k, d).unwrap()).unwrap().rss;
                    assert!((r - direct).abs() <= 1e-10 * direct.max(1.0), "i={i} k={k} d={d}");
                }
            }
        }
    }

    #[test]
    fn diagonal_fit_when_k_is_zero() {
        let ts = ts_from_fn(5, 50, pseudo);
        let report = fit_banded_var(&ts, 0, 1, false).unwrap();
        let a = report.model.coeffs()[0].to_dense();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(a[(i, j)], 0.0);
                }
            }
        }
        assert!(report.betas.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn scatter_gather_round_trip() {
        let ts = ts_from_fn(6, 60, pseudo);
        let report = fit_banded_var(&ts, 2, 2, true).unwrap();
        for i in 0..6 {
            let back = extract_row_coefficients(&report.model, i, 2).unwrap();
            assert_eq!(back, report.betas[i]);
        }
        assert_eq!(report.model.mean().unwrap(), ts.means().as_slice());
        assert!(report.rss.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn singular_rows_are_listed() {
        // series 1 duplicates series 0, so rows whose band covers both are singular
        let ts = ts_from_fn(4, 30, |i, t| if i == 1 { pseudo(0, t) } else { pseudo(i, t) });
        match fit_banded_var(&ts, 1, 1, false) {
            Err(Error::SingularRows { rows }) => assert_eq!(rows, vec![0, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
