//! Binary soft-margin SVM trained with SMO on a precomputed kernel.
//!
//! Dual: maximize `Σα - ½ Σ α_i α_j y_i y_j K_ij` subject to `0 ≤ α ≤ C`,
//! `Σ α_i y_i = 0`. The working pair is the maximal violating pair; training
//! stops once the violation `m(α) - M(α)` drops below `tol`.

use std::cell::RefCell;
use std::io::Write;

use ndarray::{s, Array2, ArrayView2};

use super::kernel::cross_kernel;
use super::LearnError;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SvmParams {
    pub fn new(gamma: f64) -> Self {
        Self { c: 1.0, gamma, tol: 1e-3, max_iter: 100_000 }
    }

    fn validate(&self) -> Result<(), LearnError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(LearnError::InvalidParams(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(LearnError::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.tol > 0.0) {
            return Err(LearnError::InvalidParams(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ α_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    /// Maximal KKT violation at termination.
    pub kkt_gap: f64,
    /// Dual objective `Σα - ½ αᵀQα`.
    pub objective: f64,
}

fn check_labels(y: &[f64]) -> Result<(), LearnError> {
    if let Some(&bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(LearnError::InvalidLabel(bad));
    }
    if y.is_empty() {
        return Err(LearnError::EmptyMatrix);
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(LearnError::SingleClassInput);
    }
    Ok(())
}

/// Source of kernel matrix rows for the solver.
trait KernelRows {
    fn ensure(&mut self, i: usize);
    fn row(&self, i: usize) -> &[f64];
}

struct Dense<'a> {
    k: &'a [f64],
    n: usize,
}

impl KernelRows for Dense<'_> {
    fn ensure(&mut self, _: usize) {}

    fn row(&self, i: usize) -> &[f64] {
        &self.k[i * self.n..(i + 1) * self.n]
    }
}

/// RBF rows computed on first use, a block of neighbouring rows at a time
/// through one matrix product. Rows live in a per-thread buffer that is kept
/// between trainings.
struct LazyRbf<'a> {
    x: ArrayView2<'a, f64>,
    norms: Vec<f64>,
    gamma: f64,
    done: Vec<bool>,
    buf: Vec<f64>,
}

const ROW_BLOCK: usize = 32;

thread_local! {
    static ROW_BUF: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

impl<'a> LazyRbf<'a> {
    fn new(x: ArrayView2<'a, f64>, gamma: f64) -> Self {
        let n = x.nrows();
        let norms = x.rows().into_iter().map(|r| r.dot(&r)).collect();
        let mut buf = ROW_BUF.with(|b| std::mem::take(&mut *b.borrow_mut()));
        buf.resize(n * n, 0.0);
        Self { x, norms, gamma, done: vec![false; n], buf }
    }
}

impl Drop for LazyRbf<'_> {
    fn drop(&mut self) {
        let buf = std::mem::take(&mut self.buf);
        ROW_BUF.with(|b| *b.borrow_mut() = buf);
    }
}

impl KernelRows for LazyRbf<'_> {
    fn ensure(&mut self, i: usize) {
        if self.done[i] {
            return;
        }
        let n = self.x.nrows();
        let lo = i / ROW_BLOCK * ROW_BLOCK;
        let hi = (lo + ROW_BLOCK).min(n);
        let g = self.x.slice(s![lo..hi, ..]).dot(&self.x.t());
        for (r, gr) in (lo..hi).zip(g.rows()) {
            let nr = self.norms[r];
            let row = &mut self.buf[r * n..(r + 1) * n];
            for ((k, d), nt) in row.iter_mut().zip(gr).zip(&self.norms) {
                *k = (-self.gamma * (nr + nt - 2.0 * d).max(0.0)).exp();
            }
            row[r] = 1.0;
            self.done[r] = true;
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        let n = self.x.nrows();
        &self.buf[i * n..(i + 1) * n]
    }
}

/// Solves the dual on a row-major `n × n` kernel matrix.
pub fn solve_smo(k: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<SmoSolution, LearnError> {
    check_labels(y)?;
    let n = y.len();
    if k.len() != n * n {
        return Err(LearnError::LengthMismatch(k.len(), n * n));
    }
    smo(&mut Dense { k, n }, y, c, tol, max_iter)
}

fn smo<K: KernelRows>(kernel: &mut K, y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<SmoSolution, LearnError> {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα - eᵀα
    let mut g = vec![-1.0; n];
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iter = 0;
    let gap = loop {
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * g[t];
            if up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < tol {
            break gap.max(0.0);
        }
        if iter >= max_iter {
            return Err(LearnError::IterationLimit(max_iter));
        }
        iter += 1;

        kernel.ensure(i);
        kernel.ensure(j);
        let (ki, kj) = (kernel.row(i), kernel.row(j));
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (ai_old, aj_old);
        if y[i] != y[j] {
            let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                }
                if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let di = (alpha[i] - ai_old) * y[i];
        let dj = (alpha[j] - aj_old) * y[j];
        for t in 0..n {
            g[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    };

    // bias from free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    let objective = -0.5 * alpha.iter().zip(&g).map(|(a, gt)| a * (gt - 1.0)).sum::<f64>();
    Ok(SmoSolution { alpha, bias: -rho, iterations: iter, kkt_gap: gap, objective })
}

/// Trained binary RBF machine, keeping only the support vectors.
#[derive(Debug, Clone)]
pub struct SvmModel {
    pub support: Array2<f64>,
    /// Training row of each support vector.
    pub support_indices: Vec<usize>,
    /// `α_i y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub kkt_gap: f64,
    pub objective: f64,
    pub iterations: usize,
}

pub fn train_svm(x: ArrayView2<'_, f64>, y: &[f64], params: &SvmParams) -> Result<SvmModel, LearnError> {
    params.validate()?;
    if x.nrows() == 0 {
        return Err(LearnError::EmptyMatrix);
    }
    if x.nrows() != y.len() {
        return Err(LearnError::LengthMismatch(x.nrows(), y.len()));
    }
    check_labels(y)?;
    let x = x.as_standard_layout();
    let sol = smo(&mut LazyRbf::new(x.view(), params.gamma), y, params.c, params.tol, params.max_iter)?;
    let support_indices: Vec<usize> = (0..y.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(SvmModel {
        support: x.select(ndarray::Axis(0), &support_indices),
        coef: support_indices.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
        support_indices,
        bias: sol.bias,
        gamma: params.gamma,
        c: params.c,
        kkt_gap: sol.kkt_gap,
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

impl SvmModel {
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let s = self.support.nrows();
        if s == 0 {
            return vec![self.bias; x.nrows()];
        }
        let k = cross_kernel(x, self.support.view(), self.gamma);
        k.chunks(s).map(|row| row.iter().zip(&self.coef).map(|(kv, c)| kv * c).sum::<f64>() + self.bias).collect()
    }

    /// `+1` where the decision value is non-negative, else `-1`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        self.decision_function(x).into_iter().map(|f| if f >= 0.0 { 1.0 } else { -1.0 }).collect()
    }

    /// Plain-text dump: header lines, then one `coef,x_1,...,x_m` row per
    /// support vector.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "gamma={:?}", self.gamma)?;
        writeln!(out, "c={:?}", self.c)?;
        writeln!(out, "bias={:?}", self.bias)?;
        writeln!(out, "support_vectors={}", self.support.nrows())?;
        for (row, coef) in self.support.rows().into_iter().zip(&self.coef) {
            let cells: Vec<String> = std::iter::once(coef).chain(row.iter()).map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}
