use crate::error::{Error, Result};

use super::dense::dot;
use super::DenseMatrix;

/// Relative pivot magnitude below which a design column counts as dependent.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Householder QR factorisation of a tall matrix, `X = Q R`.
///
/// Columns are not pivoted, so the factorisation of the first `m` columns is
/// the leading block of the full one. That lets a single factorisation serve a
/// whole family of nested designs.
#[derive(Debug, Clone)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Householder vectors, one per column, each of length `rows - j`.
    reflectors: Vec<Vec<f64>>,
    /// Upper triangle of R, column-major: `r[j][i]` for `i <= j`.
    r: Vec<Vec<f64>>,
}

impl Qr {
    /// Factorises `x` without any rank check.
    pub fn factor(x: &DenseMatrix) -> Result<Self> {
        Self::factor_columns(x.rows(), (0..x.cols()).map(|j| x.column(j)).collect())
    }

    /// Same as [`Qr::factor`] for a design given as columns of length `rows`.
    pub fn factor_columns(rows: usize, mut columns: Vec<Vec<f64>>) -> Result<Self> {
        let cols = columns.len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("design columns of unequal length".into()));
        }
        if rows < cols {
            return Err(Error::DimensionMismatch(format!(
                "least squares needs rows >= cols, got {rows}x{cols}"
            )));
        }
        let mut reflectors = Vec::with_capacity(cols);
        let mut r = Vec::with_capacity(cols);
        for j in 0..cols {
            let (done, rest) = columns.split_at_mut(j + 1);
            let col = &mut done[j];
            let tail = &col[j..];
            let alpha = dot(tail, tail).sqrt();
            let mut v = tail.to_vec();
            let diag = if alpha == 0.0 {
                0.0
            } else {
                let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
                v[0] += sign * alpha;
                -sign * alpha
            };
            let vnorm2 = dot(&v, &v);
            if vnorm2 > 0.0 {
                for other in rest.iter_mut() {
                    let s = 2.0 * dot(&v, &other[j..]) / vnorm2;
                    for (o, &vi) in other[j..].iter_mut().zip(&v) {
                        *o -= s * vi;
                    }
                }
            }
            let mut rcol = col[..j].to_vec();
            rcol.push(diag);
            r.push(rcol);
            reflectors.push(v);
        }
        Ok(Self {
            rows,
            cols,
            reflectors,
            r,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Diagonal of R (signed pivots).
    pub fn pivots(&self) -> Vec<f64> {
        self.r.iter().enumerate().map(|(j, c)| c[j]).collect()
    }

    /// First column among the leading `m` whose pivot falls below
    /// [`RANK_TOLERANCE`] times the largest pivot of that block.
    pub fn check_rank(&self, m: usize) -> Result<()> {
        let pivots: Vec<f64> = self.pivots().iter().take(m).map(|p| p.abs()).collect();
        let largest = pivots.iter().copied().fold(0.0, f64::max);
        let threshold = RANK_TOLERANCE * largest;
        match pivots
            .iter()
            .position(|&p| p <= threshold || !p.is_finite())
        {
            Some(column) => Err(Error::SingularDesign {
                column,
                pivot: pivots[column],
                threshold,
            }),
            None => Ok(()),
        }
    }

    /// `Qᵀ y`, a vector of length `rows`.
    pub fn apply_qt(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "response of length {} for a design with {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut z = y.to_vec();
        for (j, v) in self.reflectors.iter().enumerate() {
            let vnorm2 = dot(v, v);
            if vnorm2 == 0.0 {
                continue;
            }
            let s = 2.0 * dot(v, &z[j..]) / vnorm2;
            for (zi, &vi) in z[j..].iter_mut().zip(v) {
                *zi -= s * vi;
            }
        }
        Ok(z)
    }

    /// Coefficients of the regression of `y` on the leading `m` columns.
    pub fn solve_prefix(&self, qty: &[f64], m: usize) -> Result<Vec<f64>> {
        self.check_rank(m)?;
        let mut beta = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = qty[i];
            for (j, b) in beta.iter().enumerate().take(m).skip(i + 1) {
                acc -= self.r[j][i] * b;
            }
            beta[i] = acc / self.r[i][i];
        }
        Ok(beta)
    }

    /// Residual sums of squares of `y` regressed on the leading `m` columns,
    /// for every `m` in `0..=cols`.
    pub fn nested_rss(&self, qty: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols + 1];
        let mut acc: f64 = qty[self.cols..].iter().map(|v| v * v).sum();
        out[self.cols] = acc;
        for m in (0..self.cols).rev() {
            acc += qty[m] * qty[m];
            out[m] = acc;
        }
        out
    }
}

/// Least-squares solution `argmin ||y - x b||₂` via Householder QR.
///
/// Fails with [`Error::SingularDesign`] naming the first column whose pivot
/// is below `1e-12` times the largest.
pub fn lstsq(x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let qr = Qr::factor(x)?;
    let qty = qr.apply_qt(y)?;
    qr.solve_prefix(&qty, x.cols())
}
