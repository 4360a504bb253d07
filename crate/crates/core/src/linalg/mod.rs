//! Small dense and banded linear-algebra kernel.
//!
//! Dense matrices are row-major; banded matrices are stored by diagonals and
//! only ever converted to dense form explicitly. Least squares goes through a
//! Householder QR. Eigenvalue problems on the (small) companion and
//! covariance matrices are delegated to `nalgebra`.

mod banded;
mod dense;
mod qr;

pub use banded::{band_product, BandedMatrix};
pub use dense::{dot, norm2, DenseMatrix};
pub use qr::{lstsq, Qr, RANK_TOLERANCE};

use crate::error::{Error, Result};

/// Relative tolerance of the power iteration behind [`spectral_norm`].
pub const POWER_TOLERANCE: f64 = 1e-10;
/// Iteration cap of the power iteration behind [`spectral_norm`].
pub const POWER_MAX_ITER: usize = 10_000;

/// Maximum absolute column sum.
pub fn l1_norm(m: &DenseMatrix) -> f64 {
    let mut sums = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for (s, v) in sums.iter_mut().zip(m.row(i)) {
            *s += v.abs();
        }
    }
    sums.into_iter().fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn linf_norm(m: &DenseMatrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    norm2(m.data())
}

/// Largest singular value, by power iteration on `mᵀm`.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let mut tmp = vec![0.0; m.rows()];
    power_iteration(m.cols(), |v, out| {
        for (i, t) in tmp.iter_mut().enumerate() {
            *t = dot(m.row(i), v);
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &t) in tmp.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(m.row(i)) {
                *o += a * t;
            }
        }
    })
}

/// Spectral norm of a banded matrix without densifying it.
pub fn banded_spectral_norm(m: &BandedMatrix) -> Result<f64> {
    let mut tmp = vec![0.0; m.dim()];
    power_iteration(m.dim(), |v, out| {
        m.matvec_into(v, &mut tmp);
        m.tr_matvec_into(&tmp, out);
    })
}

/// [`spectral_norm`], falling back to a dense SVD when the power iteration
/// stalls on nearly tied top singular values.
pub fn spectral_norm_or_svd(m: &DenseMatrix) -> Result<f64> {
    match spectral_norm(m) {
        Err(Error::NoConvergence { .. }) => Ok(svd_spectral_norm(m)),
        other => other,
    }
}

/// [`banded_spectral_norm`] with the same dense SVD fallback.
pub fn banded_spectral_norm_or_svd(m: &BandedMatrix) -> Result<f64> {
    match banded_spectral_norm(m) {
        Err(Error::NoConvergence { .. }) => Ok(svd_spectral_norm(&m.to_dense())),
        other => other,
    }
}

/// Largest singular value from a full SVD.
pub fn svd_spectral_norm(m: &DenseMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    nalgebra::SVD::new(m.to_nalgebra(), false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Power iteration for the top eigenvalue of the PSD operator `gram`;
/// returns its square root.
fn power_iteration(dim: usize, mut gram: impl FnMut(&[f64], &mut [f64])) -> Result<f64> {
    if dim == 0 {
        return Ok(0.0);
    }
    // Deterministic, generic start vector.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i * 7919 % 101) as f64 / 101.0))
        .collect();
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut w = vec![0.0; dim];
    let mut sigma_prev = f64::NAN;
    let mut calm = 0;
    let mut gap = f64::INFINITY;
    for iter in 1..=POWER_MAX_ITER {
        gram(&v, &mut w);
        let lambda = dot(&v, &w).max(0.0);
        let wn = norm2(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        let sigma = lambda.sqrt();
        gap = (sigma - sigma_prev).abs() / sigma.max(f64::MIN_POSITIVE);
        if gap <= POWER_TOLERANCE {
            calm += 1;
            if calm >= 2 {
                return Ok(sigma);
            }
        } else {
            calm = 0;
        }
        sigma_prev = sigma;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if iter == POWER_MAX_ITER {
            return Err(Error::NoConvergence {
                what: "power iteration",
                iterations: iter,
                estimate: sigma,
                gap,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: POWER_MAX_ITER,
        estimate: sigma_prev,
        gap,
    })
}

/// Largest eigenvalue modulus of a square matrix (real Schur form).
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "spectral radius of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() == 0 {
        return Ok(0.0);
    }
    // Triangular input: the eigenvalues are the diagonal, exactly. QR
    // iteration would smear defective (e.g. nilpotent) spectra by eps^(1/n).
    let n = m.rows();
    let lower = (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == 0.0));
    let upper = (0..n).all(|i| (0..i).all(|j| m[(i, j)] == 0.0));
    if lower || upper {
        return Ok((0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max));
    }
    let schur = nalgebra::Schur::try_new(m.to_nalgebra(), f64::EPSILON, 100_000).ok_or(
        Error::NoConvergence {
            what: "Schur decomposition",
            iterations: 100_000,
            estimate: f64::NAN,
            gap: f64::NAN,
        },
    )?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// A factor `L` with `L Lᵀ = m` for a symmetric PSD `m`.
///
/// Uses Cholesky when `m` is positive definite and falls back to the
/// symmetric eigendecomposition (negative round-off eigenvalues clipped).
pub fn psd_factor(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("factor of a non-square matrix".into()));
    }
    let p = m.rows();
    let na = m.to_nalgebra();
    if let Some(ch) = nalgebra::Cholesky::new(na.clone()) {
        let l = ch.l();
        return Ok(DenseMatrix::from_fn(p, p, |i, j| l[(i, j)]));
    }
    let eig = nalgebra::SymmetricEigen::new(na);
    let scale: Vec<f64> = eig.eigenvalues.iter().map(|&e| e.max(0.0).sqrt()).collect();
    Ok(DenseMatrix::from_fn(p, p, |i, j| {
        eig.eigenvectors[(i, j)] * scale[j]
    }))
}

/// `B_r(h)`: zero every entry with `|i - j| > r`.
pub fn band_dense(h: &DenseMatrix, r: usize) -> DenseMatrix {
    DenseMatrix::from_fn(h.rows(), h.cols(), |i, j| {
        if i.abs_diff(j) <= r {
            h[(i, j)]
        } else {
            0.0
        }
    })
}
