//! Binary soft-margin SVM dual solved by sequential minimal optimisation.
//!
//! Dual: minimise `½ αᵀQα − eᵀα` subject to `yᵀα = 0`, `0 ≤ α ≤ C`, with
//! `Q_ij = y_i y_j K(x_i, x_j)`. Each iteration picks the maximal violating
//! pair `(i, j)` from the gradient and solves the two-variable subproblem
//! analytically; iteration stops when the violation gap falls below the
//! tolerance.

use std::collections::VecDeque;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::{check_matrix, KernelSpec, SvmError};

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    pub c: f64,
    pub tolerance: f64,
    /// Iteration budget in passes; one pass is `n` pair updates per sample.
    pub max_passes: usize,
}

impl SmoConfig {
    pub fn new(c: f64) -> Self {
        SmoConfig {
            c,
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    #[serde(skip, default = "linear")]
    pub kernel: KernelSpec,
}

fn linear() -> KernelSpec {
    KernelSpec::Linear
}

impl BinarySvmModel {
    pub fn from_solution(x: &[Vec<f64>], y: &[f64], sol: &SmoSolution, kernel: KernelSpec) -> Self {
        let mut support_vectors = Vec::new();
        let mut dual_coefs = Vec::new();
        for (i, &a) in sol.alphas.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(x[i].clone());
                dual_coefs.push(a * y[i]);
            }
        }
        BinarySvmModel {
            support_vectors,
            dual_coefs,
            bias: sol.bias,
            kernel,
        }
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, |v| v.len())
    }

    /// `f(x) = Σ α_i y_i K(x_i, x) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64, SvmError> {
        if !self.support_vectors.is_empty() && x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.decision_unchecked(x))
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

/// Lazily computed kernel rows with FIFO eviction once the byte budget is hit.
struct KernelRows<'a> {
    x: &'a [Vec<f64>],
    kernel: KernelSpec,
    rows: Vec<Option<Rc<Vec<f64>>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [Vec<f64>], kernel: KernelSpec) -> Self {
        let n = x.len().max(1);
        KernelRows {
            x,
            kernel,
            rows: vec![None; x.len()],
            order: VecDeque::new(),
            capacity: (CACHE_BYTES / (8 * n)).max(2),
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows[old] = None;
            }
        }
        let xi = &self.x[i];
        let row: Rc<Vec<f64>> = Rc::new(self.x.iter().map(|xk| self.kernel.eval_unchecked(xi, xk)).collect());
        self.rows[i] = Some(Rc::clone(&row));
        self.order.push_back(i);
        row
    }
}

fn validate(x: &[Vec<f64>], y: &[f64], cfg: &SmoConfig, kernel: &KernelSpec) -> Result<(), SvmError> {
    check_matrix(x)?;
    kernel.validate()?;
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(SvmError::InvalidParameter(format!("C must be positive, got {}", cfg.c)));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(SvmError::InvalidParameter(format!("labels must be ±1, got {bad}")));
    }
    if x.len() < 2 || !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(SvmError::SingleClassData);
    }
    Ok(())
}

pub fn solve_smo(x: &[Vec<f64>], y: &[f64], kernel: KernelSpec, cfg: &SmoConfig) -> Result<SmoSolution, SvmError> {
    validate(x, y, cfg, &kernel)?;
    let n = x.len();
    let c = cfg.c;
    let mut rows = KernelRows::new(x, kernel);
    let diag: Vec<f64> = x.iter().map(|xi| kernel.eval_unchecked(xi, xi)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let max_iter = (cfg.max_passes * n * n).max(10_000);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let ki = rows.row(i);
        let kj = rows.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            // Q_ij = -K_ij when the labels differ
            let quad = (diag[i] + diag[j] - 2.0 * ki[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * ki[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for k in 0..n {
            grad[k] += y[k] * (y[i] * ki[k] * di + y[j] * kj[k] * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations without reaching tolerance {}", cfg.tolerance);
    }

    // offset from the free variables, or the midpoint of the feasible range
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
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
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

    Ok(SmoSolution {
        alphas: alpha,
        bias: -rho,
        iterations,
        converged,
    })
}

/// Trains a binary SVM on labels in {−1, +1}.
pub fn train_binary(x: &[Vec<f64>], y: &[f64], c: f64, kernel: KernelSpec) -> Result<BinarySvmModel, SvmError> {
    let sol = solve_smo(x, y, kernel, &SmoConfig::new(c))?;
    Ok(BinarySvmModel::from_solution(x, y, &sol, kernel))
}

/// Per-sample KKT violation of a dual solution, in units of the margin
/// `y_i f(x_i)`: bound-free points must sit on the margin, `α = 0` points
/// outside it and `α = C` points inside it.
pub fn kkt_residuals(x: &[Vec<f64>], y: &[f64], alphas: &[f64], bias: f64, c: f64, kernel: KernelSpec) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let f: f64 = (0..x.len())
                .filter(|&j| alphas[j] != 0.0)
                .map(|j| alphas[j] * y[j] * kernel.eval_unchecked(&x[j], &x[i]))
                .sum::<f64>()
                + bias;
            let margin = y[i] * f;
            if alphas[i] <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if alphas[i] >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .collect()
}
