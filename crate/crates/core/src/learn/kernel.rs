use ndarray::{ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

/// `exp(-γ ‖a - b‖²)`.
pub fn rbf(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// `1 / (m · mean column variance)`, falling back to `1 / m` when every
/// column is constant.
pub fn scale_gamma(x: ArrayView2<'_, f64>) -> f64 {
    let m = x.ncols().max(1) as f64;
    let var = if x.nrows() == 0 { 0.0 } else { x.var_axis(Axis(0), 0.0).mean().unwrap_or(0.0) };
    if var > 0.0 {
        1.0 / (m * var)
    } else {
        1.0 / m
    }
}

fn sq_norms(x: ArrayView2<'_, f64>) -> Vec<f64> {
    x.rows().into_iter().map(|r| r.dot(&r)).collect()
}

/// Row-major `a.nrows() × b.nrows()` RBF kernel matrix, via
/// `‖a‖² + ‖b‖² - 2 a·b`.
pub fn cross_kernel(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, gamma: f64) -> Vec<f64> {
    let na = sq_norms(a);
    let nb = sq_norms(b);
    let cols = b.nrows();
    let dots = a.dot(&b.t());
    let mut out = dots.into_raw_vec_and_offset().0;
    out.par_chunks_mut(cols.max(1)).enumerate().for_each(|(i, row)| {
        for (slot, nbj) in row.iter_mut().zip(&nb) {
            let d2 = (na[i] + nbj - 2.0 * *slot).max(0.0);
            *slot = (-gamma * d2).exp();
        }
    });
    out
}

/// Row-major `n × n` RBF Gram matrix of the rows of `x`.
pub fn gram_matrix(x: ArrayView2<'_, f64>, gamma: f64) -> Vec<f64> {
    let n = x.nrows();
    let mut k = cross_kernel(x, x, gamma);
    // exact symmetry and unit diagonal
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            k[i * n + j] = k[j * n + i];
        }
    }
    k
}
