use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// A `p`-variate series of length `n`, stored as a `p x n` matrix whose
/// column `t` is the observation `y_t`. Row `i` is component series `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: DenseMatrix,
    labels: Option<Vec<String>>,
    coords: Option<Vec<(f64, f64)>>,
}

impl TimeSeries {
    /// `values` is `p x n`, one column per time point.
    pub fn new(values: DenseMatrix) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::InvalidArgument("empty time series".into()));
        }
        if values.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("time series contains non-finite values".into()));
        }
        Ok(Self {
            values,
            labels: None,
            coords: None,
        })
    }

    /// Builds a series from observations `y_0, ..., y_{n-1}`, each of length `p`.
    pub fn from_observations(obs: &[Vec<f64>]) -> Result<Self> {
        let p = obs.first().map_or(0, Vec::len);
        if obs.iter().any(|o| o.len() != p) {
            return Err(Error::DimensionMismatch("observations of unequal length".into()));
        }
        Self::new(DenseMatrix::from_fn(p, obs.len(), |i, t| obs[t][i]))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} series",
                labels.len(),
                self.p()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_coords(mut self, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for {} series",
                coords.len(),
                self.p()
            )));
        }
        if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.cols()
    }

    /// `y_{i,t}`.
    #[inline]
    pub fn get(&self, i: usize, t: usize) -> f64 {
        self.values[(i, t)]
    }

    /// Component series `i` over all time points.
    pub fn series(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    /// The observation `y_t`.
    pub fn observation(&self, t: usize) -> Vec<f64> {
        self.values.column(t)
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Labels, or `y0, y1, ...` when none are set.
    pub fn labels_or_default(&self) -> Vec<String> {
        self.labels
            .clone()
            .unwrap_or_else(|| (0..self.p()).map(|i| format!("y{i}")).collect())
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.p())
            .map(|i| self.series(i).iter().sum::<f64>() / self.n() as f64)
            .collect()
    }

    /// The series with each component centred at its sample mean, and the means.
    pub fn demeaned(&self) -> (TimeSeries, Vec<f64>) {
        let means = self.means();
        let values = DenseMatrix::from_fn(self.p(), self.n(), |i, t| self.get(i, t) - means[i]);
        (self.with_values(values), means)
    }

    /// Time points `range` (labels and coordinates kept).
    pub fn slice(&self, range: Range<usize>) -> Result<TimeSeries> {
        if range.start >= range.end || range.end > self.n() {
            return Err(Error::InvalidArgument(format!(
                "time range {range:?} outside 0..{}",
                self.n()
            )));
        }
        let values = DenseMatrix::from_fn(self.p(), range.len(), |i, t| self.get(i, range.start + t));
        Ok(self.with_values(values))
    }

    /// Reorders the components: new series `m` is old series `perm[m]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<TimeSeries> {
        validate_permutation(perm, self.p())?;
        let values = DenseMatrix::from_fn(self.p(), self.n(), |m, t| self.get(perm[m], t));
        Ok(TimeSeries {
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| perm.iter().map(|&j| l[j].clone()).collect()),
            coords: self.coords.as_ref().map(|c| perm.iter().map(|&j| c[j]).collect()),
        })
    }

    /// Same metadata, new values of the same dimension `p`.
    pub(crate) fn with_values(&self, values: DenseMatrix) -> TimeSeries {
        debug_assert_eq!(values.rows(), self.p());
        TimeSeries {
            values,
            labels: self.labels.clone(),
            coords: self.coords.clone(),
        }
    }
}

pub fn validate_permutation(perm: &[usize], p: usize) -> Result<()> {
    if perm.len() != p {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} for {p} series",
            perm.len()
        )));
    }
    let mut seen = vec![false; p];
    for &j in perm {
        if j >= p || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{p}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TimeSeries {
        TimeSeries::from_observations(&[vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]]).unwrap()
    }

    #[test]
    fn layout() {
        let ts = toy();
        assert_eq!((ts.p(), ts.n()), (2, 3));
        assert_eq!(ts.series(1), &[10.0, 20.0, 30.0]);
        assert_eq!(ts.observation(2), vec![3.0, 30.0]);
    }

    #[test]
    fn demean_and_slice() {
        let (d, means) = toy().demeaned();
        assert_eq!(means, vec![2.0, 20.0]);
        assert_eq!(d.series(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(toy().slice(1..3).unwrap().series(0), &[2.0, 3.0]);
        assert!(toy().slice(2..5).is_err());
    }

    #[test]
    fn permutation_checks() {
        let ts = toy().with_labels(vec!["a".into(), "b".into()]).unwrap();
        let swapped = ts.permuted(&[1, 0]).unwrap();
        assert_eq!(swapped.series(0), ts.series(1));
        assert_eq!(swapped.labels().unwrap(), &["b".to_string(), "a".to_string()]);
        assert!(ts.permuted(&[0, 0]).is_err());
        assert!(ts.permuted(&[0]).is_err());
        assert!(toy().with_labels(vec!["a".into()]).is_err());
    }
}
