use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{linear_predictor_at, normal, FitRequest, Mask, RegionFit};
use crate::data::{Dataset, Task};

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-10;
const RIDGE: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e12;
const MAX_HALVINGS: usize = 60;
/// Probability assigned to the observed class when a region's responses are
/// all equal.
const CLIP: f64 = 1e-6;

/// Negative log-likelihood contribution, derivative and second derivative
/// with respect to the linear predictor.
#[inline]
fn point_terms(task: Task, eta: f64, y: f64) -> (f64, f64, f64) {
    match task {
        Task::Logistic => {
            let softplus = eta.max(0.0) + (-eta.abs()).exp().ln_1p();
            let p = 1.0 / (1.0 + (-eta).exp());
            (softplus - y * eta, p - y, p * (1.0 - p))
        }
        Task::Probit => {
            // For y = 0 the contribution is -log Phi(-eta).
            let (t, sign) = if y == 1.0 { (eta, 1.0) } else { (-eta, -1.0) };
            let lam = normal::mills(t);
            (-normal::log_cdf(t), -sign * lam, lam * (t + lam))
        }
        Task::Regression => unreachable!("not a binary link"),
    }
}

/// Negative Bernoulli log-likelihood of `beta` on `rows`.
pub fn binary_nll(data: &Dataset, rows: &[usize], mask: Mask, beta: &[f64], task: Task) -> f64 {
    rows.iter()
        .map(|&i| {
            let eta = linear_predictor_at(data, i, mask, beta);
            point_terms(task, eta, data.response()[i]).0
        })
        .sum()
}

/// Analytic gradient of [`binary_nll`] with respect to `beta`.
pub fn binary_gradient(data: &Dataset, rows: &[usize], mask: Mask, beta: &[f64], task: Task) -> Vec<f64> {
    let cols: Vec<usize> = mask.columns().collect();
    let mut g = vec![0.0; cols.len()];
    for &i in rows {
        let eta = linear_predictor_at(data, i, mask, beta);
        let (_, d1, _) = point_terms(task, eta, data.response()[i]);
        for (gk, &c) in g.iter_mut().zip(&cols) {
            *gk += d1 * data.design(i, c);
        }
    }
    g
}

pub fn fit_logistic(data: &Dataset, req: &FitRequest<'_>) -> RegionFit {
    fit_binary(data, req, Task::Logistic)
}

pub fn fit_probit(data: &Dataset, req: &FitRequest<'_>) -> RegionFit {
    fit_binary(data, req, Task::Probit)
}

struct Problem<'a> {
    data: &'a Dataset,
    rows: &'a [usize],
    cols: Vec<usize>,
    task: Task,
    design: DMatrix<f64>,
    y: Vec<f64>,
}

impl Problem<'_> {
    fn objective(&self, beta: &DVector<f64>, ridge: bool) -> f64 {
        let eta = &self.design * beta;
        let nll: f64 = eta
            .iter()
            .zip(&self.y)
            .map(|(&e, &y)| point_terms(self.task, e, y).0)
            .sum();
        if ridge {
            nll + RIDGE * beta.norm_squared()
        } else {
            nll
        }
    }

    fn derivatives(&self, beta: &DVector<f64>, ridge: bool) -> (DVector<f64>, DMatrix<f64>) {
        let s = self.cols.len();
        let eta = &self.design * beta;
        let mut g = DVector::zeros(s);
        let mut h = DMatrix::zeros(s, s);
        for (r, (&e, &y)) in eta.iter().zip(&self.y).enumerate() {
            let (_, d1, d2) = point_terms(self.task, e, y);
            let x = self.design.row(r);
            for a in 0..s {
                g[a] += d1 * x[a];
                let w = d2 * x[a];
                for b in 0..=a {
                    h[(a, b)] += w * x[b];
                }
            }
        }
        for a in 0..s {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        if ridge {
            g += beta * (2.0 * RIDGE);
            for a in 0..s {
                h[(a, a)] += 2.0 * RIDGE;
            }
        }
        (g, h)
    }
}

/// True when `h` is not positive definite or its condition number, measured
/// against both its own largest eigenvalue and the curvature scale `scale` of
/// the starting point, exceeds the limit.
fn ill_conditioned(h: &DMatrix<f64>, scale: f64) -> bool {
    let eig = SymmetricEigen::new(h.clone()).eigenvalues;
    let max = eig.max().max(scale);
    let min = eig.min();
    min.is_nan() || min <= 0.0 || max / min > MAX_CONDITION
}

/// Damped Newton iterations from `beta`. Returns the final estimate, its
/// objective and whether the objective change fell below tolerance.
fn newton(prob: &Problem<'_>, mut beta: DVector<f64>, ridge: &mut bool, allow_switch: bool) -> (DVector<f64>, bool) {
    let mut obj = prob.objective(&beta, *ridge);
    let scale = SymmetricEigen::new(prob.derivatives(&beta, false).1).eigenvalues.max();
    for _ in 0..MAX_ITER {
        let (mut g, mut h) = prob.derivatives(&beta, *ridge);
        if !*ridge && allow_switch && ill_conditioned(&h, scale) {
            *ridge = true;
            obj = prob.objective(&beta, true);
            (g, h) = prob.derivatives(&beta, true);
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = &beta - &step * t;
            let o = prob.objective(&cand, *ridge);
            if o < obj {
                accepted = Some((cand, o));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, o)) = accepted else {
            return (beta, true);
        };
        let change = obj - o;
        beta = cand;
        obj = o;
        if change < TOL {
            if !*ridge && allow_switch && ill_conditioned(&prob.derivatives(&beta, false).1, scale) {
                *ridge = true;
                obj = prob.objective(&beta, true);
                continue;
            }
            return (beta, true);
        }
    }
    (beta, false)
}

fn fit_binary(data: &Dataset, req: &FitRequest<'_>, task: Task) -> RegionFit {
    let cols: Vec<usize> = req.mask.columns().collect();
    let s = cols.len();
    let rows = req.rows;
    let bools = req.mask.to_bools(data.p());
    if s == 0 {
        return RegionFit {
            mask: bools,
            beta: Vec::new(),
            fit_stat: binary_nll(data, rows, req.mask, &[], task),
            stabilized: false,
        };
    }
    let y: Vec<f64> = rows.iter().map(|&i| data.response()[i]).collect();
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    if req.mask.contains(0) && (ones == 0 || ones == y.len()) {
        let p = if ones == 0 { CLIP } else { 1.0 - CLIP };
        let eta = match task {
            Task::Logistic => (p / (1.0 - p)).ln(),
            _ => normal::quantile(p),
        };
        let mut beta = vec![0.0; s];
        beta[0] = eta;
        return RegionFit {
            fit_stat: binary_nll(data, rows, req.mask, &beta, task),
            mask: bools,
            beta,
            stabilized: true,
        };
    }
    let design = DMatrix::from_fn(rows.len(), s, |r, k| data.design(rows[r], cols[k]));
    let prob = Problem {
        data,
        rows,
        cols,
        task,
        design,
        y,
    };
    let mut ridge = false;
    let (mut beta, converged) = newton(&prob, DVector::zeros(s), &mut ridge, true);
    if !converged && !ridge {
        ridge = true;
        beta = newton(&prob, beta, &mut ridge, false).0;
    }
    let beta: Vec<f64> = beta.iter().copied().collect();
    RegionFit {
        fit_stat: binary_nll(prob.data, prob.rows, req.mask, &beta, task),
        mask: bools,
        beta,
        stabilized: ridge,
    }
}
