use crate::error::{Error, Result};

use super::DenseMatrix;

/// Square `p x p` matrix stored by diagonals.
///
/// Only the `2k + 1` diagonals with offset `j - i` in `-k..=k` are stored;
/// every entry with `|i - j| > k` reads as exactly zero. Diagonal with offset
/// `o` has `p - |o|` entries, indexed by `min(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    p: usize,
    k: usize,
    diags: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(p: usize, k: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if k >= p {
            return Err(Error::InvalidArgument(format!(
                "bandwidth parameter {k} must be below the dimension {p}"
            )));
        }
        let diags = (0..=2 * k).map(|d| vec![0.0; p - d.abs_diff(k)]).collect();
        Ok(Self { p, k, diags })
    }

    pub fn identity(p: usize) -> Result<Self> {
        let mut m = Self::zeros(p, 0)?;
        m.diags[0].iter_mut().for_each(|v| *v = 1.0);
        Ok(m)
    }

    /// Copies the band of `m`. Fails if `m` has a nonzero entry outside it.
    pub fn from_dense(m: &DenseMatrix, k: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "banded matrix needs a square input, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let p = m.rows();
        let mut out = Self::zeros(p, k.min(p.saturating_sub(1)))?;
        for i in 0..p {
            for j in 0..p {
                let v = m[(i, j)];
                if i.abs_diff(j) > out.k {
                    if v != 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "entry ({i}, {j}) = {v} lies outside bandwidth parameter {k}"
                        )));
                    }
                } else {
                    out.set(i, j, v)?;
                }
            }
        }
        Ok(out)
    }

    /// Keeps the band `|i - j| <= k` of `m` and drops the rest.
    pub fn truncate_dense(m: &DenseMatrix, k: usize) -> Result<Self> {
        let banded = super::band_dense(m, k);
        Self::from_dense(&banded, k)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.p, self.p);
        for (i, j, v) in self.band_entries() {
            m[(i, j)] = v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    /// Bandwidth parameter `k`: the stored band is `|i - j| <= k`.
    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.k
    }

    /// Smallest `k` such that every nonzero entry satisfies `|i - j| <= k`.
    pub fn effective_bandwidth(&self) -> usize {
        self.band_entries()
            .filter(|&(_, _, v)| v != 0.0)
            .map(|(i, j, _)| i.abs_diff(j))
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.p && j < self.p, "index ({i}, {j}) out of range");
        if i.abs_diff(j) > self.k {
            return 0.0;
        }
        self.diags[self.k + j - i][i.min(j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i >= self.p || j >= self.p {
            return Err(Error::InvalidArgument(format!(
                "index ({i}, {j}) out of range for dimension {}",
                self.p
            )));
        }
        if i.abs_diff(j) > self.k {
            return Err(Error::InvalidArgument(format!(
                "entry ({i}, {j}) lies outside bandwidth parameter {}",
                self.k
            )));
        }
        let slot = self.k + j - i;
        self.diags[slot][i.min(j)] = v;
        Ok(())
    }

    /// Stored diagonal at offset `j - i`.
    pub fn diagonal(&self, offset: isize) -> Option<&[f64]> {
        let k = self.k as isize;
        (-k..=k)
            .contains(&offset)
            .then(|| self.diags[(offset + k) as usize].as_slice())
    }

    /// Iterates `(i, j, value)` over the stored band, row by row.
    pub fn band_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.p).flat_map(move |i| {
            let lo = i.saturating_sub(self.k);
            let hi = (i + self.k).min(self.p - 1);
            (lo..=hi).map(move |j| (i, j, self.get(i, j)))
        })
    }

    /// Column range `lo..=hi` of the band in row `i`.
    pub fn row_span(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.k), (i + self.k).min(self.p - 1))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            p: self.p,
            k: self.k,
            diags: self
                .diags
                .iter()
                .map(|d| d.iter().map(|v| v * s).collect())
                .collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut diags = self.diags.clone();
        diags.reverse();
        Self {
            p: self.p,
            k: self.k,
            diags,
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "{p}x{p} banded times vector of length {}",
                v.len(),
                p = self.p
            )));
        }
        let mut out = vec![0.0; self.p];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    /// `out = self * v` without length checks beyond debug assertions.
    pub(crate) fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.p);
        debug_assert_eq!(out.len(), self.p);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (slot, diag) in self.diags.iter().enumerate() {
            if slot >= self.k {
                let off = slot - self.k;
                for (t, &a) in diag.iter().enumerate() {
                    out[t] += a * v[t + off];
                }
            } else {
                let off = self.k - slot;
                for (t, &a) in diag.iter().enumerate() {
                    out[t + off] += a * v[t];
                }
            }
        }
    }

    /// `selfᵀ v`.
    pub(crate) fn tr_matvec_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (slot, diag) in self.diags.iter().enumerate() {
            if slot >= self.k {
                let off = slot - self.k;
                for (t, &a) in diag.iter().enumerate() {
                    out[t + off] += a * v[t];
                }
            } else {
                let off = self.k - slot;
                for (t, &a) in diag.iter().enumerate() {
                    out[t] += a * v[t + off];
                }
            }
        }
    }
}

/// Product of two banded matrices.
///
/// The result carries bandwidth parameter `min(a.k + b.k, p - 1)`; entries
/// outside that band of the dense product are zero by construction.
pub fn band_product(a: &BandedMatrix, b: &BandedMatrix) -> Result<BandedMatrix> {
    if a.p != b.p {
        return Err(Error::DimensionMismatch(format!(
            "banded product of dimensions {} and {}",
            a.p, b.p
        )));
    }
    let p = a.p;
    let mut out = BandedMatrix::zeros(p, (a.k + b.k).min(p - 1))?;
    for i in 0..p {
        let (lo, hi) = a.row_span(i);
        for l in lo..=hi {
            let av = a.get(i, l);
            if av == 0.0 {
                continue;
            }
            let (blo, bhi) = b.row_span(l);
            for j in blo..=bhi {
                let slot = out.k + j - i;
                out.diags[slot][i.min(j)] += av * b.get(l, j);
            }
        }
    }
    Ok(out)
}
