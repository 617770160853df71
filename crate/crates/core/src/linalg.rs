use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Largest Gram condition number accepted before inversion is refused.
pub(crate) const MAX_GRAM_COND: f64 = 1e12;

/// One CN(0, 1) sample.
#[inline]
pub(crate) fn cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn cn_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    // column-major fill keeps the draw order independent of the storage layout
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = cn(rng);
        }
    }
    m
}

pub(crate) fn cn_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVec {
    CVec::from_fn(len, |_, _| cn(rng))
}

pub(crate) fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in ascending order.
pub(crate) fn eigh(a: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub(crate) fn lambda_max(a: &CMat) -> f64 {
    let (vals, _) = eigh(a);
    vals[vals.len() - 1]
}

/// Inverse of a Hermitian positive-definite Gram matrix via Cholesky,
/// refusing matrices whose condition number exceeds [`MAX_GRAM_COND`].
pub(crate) fn gram_inverse(gram: &CMat) -> Result<CMat> {
    let n = gram.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let (vals, _) = eigh(gram);
    let (lo, hi) = (vals[0], vals[n - 1]);
    if lo <= 0.0 || hi / lo > MAX_GRAM_COND {
        let cond = if lo <= 0.0 { f64::INFINITY } else { hi / lo };
        return Err(Error::Singular { cond });
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(Error::Singular { cond: hi / lo })?;
    Ok(chol.inverse())
}
