//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use partwise::{ChangePointConfig, Dataset, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// Continuous predictors on `(lo, hi)` with a dense response.
pub fn random_dataset(r: &mut impl Rng, n: usize, p: usize) -> Dataset {
    let cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
    let y = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
    Dataset::new(cols, y, names(p)).unwrap()
}

/// Random valid configuration: each predictor breaks with probability ½ at up
/// to `max_l` distinct observed-value midpoints.
pub fn random_config(r: &mut impl Rng, data: &Dataset, max_l: usize) -> ChangePointConfig {
    let p = data.p();
    let mut entries = Vec::new();
    for j in 0..p {
        if !r.random_bool(0.5) {
            continue;
        }
        let mut vals: Vec<f64> = data.column(j).to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        if vals.len() < 2 {
            continue;
        }
        let l = r.random_range(1..=max_l.min(vals.len() - 1));
        let mut ts: Vec<f64> = (0..l)
            .map(|_| {
                let k = r.random_range(0..vals.len() - 1);
                (vals[k] + vals[k + 1]) / 2.0
            })
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        entries.push((j, ts));
    }
    ChangePointConfig::new(p, entries).unwrap()
}

/// Region index of row `i`, recomputed from the thresholds with the first
/// break predictor varying fastest.
pub fn oracle_region(data: &Dataset, config: &ChangePointConfig, i: usize) -> usize {
    let mut r = 0;
    let mut radix = 1;
    for j in 0..data.p() {
        let ts = config.thresholds(j);
        if ts.is_empty() {
            continue;
        }
        let x = data.value(i, j);
        let z = ts.iter().filter(|&&t| x > t).count();
        r += z * radix;
        radix *= ts.len() + 1;
    }
    r
}

/// Code length recomputed term by term from raw data, threshold values,
/// per-region parameter counts and fit statistics.
pub fn oracle_mdl(data: &Dataset, config: &ChangePointConfig, sizes: &[usize], stats: &[f64], task: Task) -> f64 {
    let n = data.n();
    let p = data.p() as f64;
    let breakers: Vec<usize> = (0..data.p()).filter(|&j| !config.thresholds(j).is_empty()).collect();
    let b = breakers.len() as f64;
    let mut total = b * p.log2();
    for &j in &breakers {
        let ts = config.thresholds(j);
        let l = ts.len();
        let mut counts = vec![0usize; l + 1];
        for i in 0..n {
            let x = data.value(i, j);
            counts[ts.iter().filter(|&&t| x > t).count()] += 1;
        }
        total += (b + 1.0).log2() + (l as f64 + 1.0).log2();
        total += counts.iter().map(|&c| (c as f64).log2()).sum::<f64>();
    }
    let regions: usize = breakers.iter().map(|&j| config.thresholds(j).len() + 1).product();
    let mut nr = vec![0usize; regions];
    for i in 0..n {
        nr[oracle_region(data, config, i)] += 1;
    }
    for r in 0..regions {
        total += (regions as f64).log2() + sizes[r] as f64 / 2.0 * (nr[r] as f64).log2();
    }
    let s: f64 = stats.iter().sum();
    total
        + match task {
            Task::Regression => n as f64 / 2.0 * (s / n as f64).max(1e-12).ln(),
            _ => s,
        }
}

/// Row-major design with a leading column of ones.
pub fn design(data: &Dataset, rows: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|&i| std::iter::once(1.0).chain((0..data.p()).map(|j| data.value(i, j))).collect())
        .collect()
}

/// Least squares through the normal equations, solved by Gaussian
/// elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let s = x[0].len();
    let mut a = vec![vec![0.0; s + 1]; s];
    for (row, &yi) in x.iter().zip(y) {
        for u in 0..s {
            for v in 0..s {
                a[u][v] += row[u] * row[v];
            }
            a[u][s] += row[u] * yi;
        }
    }
    for c in 0..s {
        let piv = (c..s).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..s {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=s {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..s).map(|c| a[c][s] / a[c][c]).collect();
    let rss = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let f: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (yi - f).powi(2)
        })
        .sum();
    (beta, rss)
}

fn std_normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// Negative Bernoulli log-likelihood and its gradient, written directly from
/// the link functions.
pub fn oracle_nll(task: Task, x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let mut f = 0.0;
    let mut g = vec![0.0; beta.len()];
    for (row, &yi) in x.iter().zip(y) {
        let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
        let (nll, d) = match task {
            Task::Logistic => {
                let p = 1.0 / (1.0 + (-eta).exp());
                ((1.0 + eta.exp()).ln() - yi * eta, p - yi)
            }
            Task::Probit => {
                let p = std_normal_cdf(eta);
                let dens = (-eta * eta / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (
                    -(yi * p.ln() + (1.0 - yi) * (1.0 - p).ln()),
                    -yi * dens / p + (1.0 - yi) * dens / (1.0 - p),
                )
            }
            Task::Regression => unreachable!(),
        };
        f += nll;
        for (gk, xk) in g.iter_mut().zip(row) {
            *gk += d * xk;
        }
    }
    (f, g)
}

/// Gradient descent with Armijo backtracking.
pub fn gradient_descent(task: Task, x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let mut beta = vec![0.0; x[0].len()];
    let (mut f, mut g) = oracle_nll(task, x, y, &beta);
    let mut step = 1.0;
    for _ in 0..200_000 {
        let gn: f64 = g.iter().map(|v| v * v).sum();
        if gn.sqrt() < 1e-10 {
            break;
        }
        step *= 2.0;
        loop {
            let cand: Vec<f64> = beta.iter().zip(&g).map(|(b, d)| b - step * d).collect();
            let (fc, gc) = oracle_nll(task, x, y, &cand);
            if fc <= f - 0.5 * step * gn {
                beta = cand;
                f = fc;
                g = gc;
                break;
            }
            step /= 2.0;
            if step < 1e-300 {
                return (beta, f);
            }
        }
    }
    (beta, f)
}

/// Draw of a two-predictor binary instance from known coefficients.
pub fn binary_region(r: &mut impl Rng, n: usize, beta: &[f64], task: Task) -> Dataset {
    let cols: Vec<Vec<f64>> = (0..beta.len() - 1)
        .map(|_| (0..n).map(|_| r.random_range(-2.0..2.0)).collect())
        .collect();
    let y = (0..n)
        .map(|i| {
            let eta = beta[0] + (1..beta.len()).map(|k| beta[k] * cols[k - 1][i]).sum::<f64>();
            let p = match task {
                Task::Logistic => 1.0 / (1.0 + (-eta).exp()),
                _ => std_normal_cdf(eta),
            };
            f64::from(r.random_bool(p))
        })
        .collect();
    Dataset::new(cols, y, names(beta.len() - 1)).unwrap()
}

/// Tiny piecewise-linear instance on two discrete predictors whose every
/// admissible cut can be listed in the candidate set.
pub fn tiny_instance(r: &mut impl Rng, n: usize) -> Dataset {
    let levels = [3usize, 3];
    let cols: Vec<Vec<f64>> = levels
        .iter()
        .map(|&lv| (0..n).map(|_| r.random_range(0..lv) as f64).collect())
        .collect();
    let t1 = r.random_range(0..2) as f64 + 0.5;
    let split1 = r.random_bool(0.7);
    let split2 = r.random_bool(0.5);
    let betas: Vec<[f64; 3]> = (0..4)
        .map(|_| [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)])
        .collect();
    let y = (0..n)
        .map(|i| {
            let a = usize::from(split1 && cols[0][i] > t1);
            let b = usize::from(split2 && cols[1][i] > 1.5);
            let bt = betas[a + 2 * b];
            bt[0] + bt[1] * cols[0][i] + bt[2] * cols[1][i] + r.random_range(-0.5..0.5)
        })
        .collect();
    Dataset::new(cols, y, names(2)).unwrap()
}
