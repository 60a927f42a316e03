//! Dense complex linear-algebra helpers shared by the solvers.

use ndarray as nd;
use num_complex::Complex64 as C64;

/// Conjugate transpose.
pub fn dagger(m: &nd::Array2<C64>) -> nd::Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Identity matrix.
pub fn eye(d: usize) -> nd::Array2<C64> {
    nd::Array2::eye(d)
}

/// Column-stacking vectorization: v[i + d j] = m[i, j].
pub fn vec_density(m: &nd::Array2<C64>) -> nd::Array1<C64> {
    let d = m.nrows();
    nd::Array1::from_shape_fn(d * d, |k| m[[k % d, k / d]])
}

/// Inverse of [`vec_density`].
pub fn unvec_density(v: &nd::ArrayView1<C64>, d: usize) -> nd::Array2<C64> {
    nd::Array2::from_shape_fn((d, d), |(i, j)| v[i + d * j])
}

/// Symmetrize toward the Hermitian part, (m + m†)/2.
pub fn hermitize(m: &nd::Array2<C64>) -> nd::Array2<C64> {
    let md = dagger(m);
    (m + &md).mapv(|z| z * 0.5)
}

/// Largest entry magnitude.
pub fn max_abs(m: &nd::Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius(m: &nd::Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Trace.
pub fn trace(m: &nd::Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Trace of a matrix product, without forming it.
pub fn trace_of_product(a: &nd::Array2<C64>, b: &nd::Array2<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[[i, k]] * b[[k, i]];
        }
    }
    acc
}
