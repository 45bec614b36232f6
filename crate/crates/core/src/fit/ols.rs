use super::{FitRequest, Mask, RegionFit};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Columns whose Householder diagonal falls below this fraction of their
/// original norm are treated as linearly dependent.
const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of the selected columns on the request's rows.
///
/// Solved by Householder QR so that the residual sum of squares is read off
/// the transformed response without cancellation.
pub fn fit_ols(data: &Dataset, req: &FitRequest<'_>) -> Result<RegionFit> {
    let rows = req.rows;
    let m = rows.len();
    let cols: Vec<usize> = req.mask.columns().collect();
    let s = cols.len();
    let mut y: Vec<f64> = rows.iter().map(|&i| data.response()[i]).collect();
    if s == 0 {
        return Ok(RegionFit {
            mask: req.mask.to_bools(data.p()),
            beta: Vec::new(),
            fit_stat: y.iter().map(|v| v * v).sum(),
            stabilized: false,
        });
    }
    if m < s {
        return Err(Error::SingularFit { rows: m });
    }
    // Column-major m x s design.
    let mut a = vec![0.0; m * s];
    for (k, &c) in cols.iter().enumerate() {
        for (r, &i) in rows.iter().enumerate() {
            a[k * m + r] = data.design(i, c);
        }
    }
    let (beta, rss) = householder_lstsq(&mut a, &mut y, m, s).ok_or(Error::SingularFit { rows: m })?;
    Ok(RegionFit {
        mask: req.mask.to_bools(data.p()),
        beta,
        fit_stat: rss,
        stabilized: false,
    })
}

/// Solves `min |A b - y|` in place. Returns `None` for rank-deficient `A`.
pub(crate) fn householder_lstsq(a: &mut [f64], y: &mut [f64], m: usize, s: usize) -> Option<(Vec<f64>, f64)> {
    let mut diag = vec![0.0; s];
    for k in 0..s {
        let orig_norm = a[k * m..(k + 1) * m].iter().map(|v| v * v).sum::<f64>().sqrt();
        let col = &a[k * m + k..(k + 1) * m];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if orig_norm == 0.0 || norm <= RANK_TOL * orig_norm {
            return None;
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |target: &mut [f64]| {
            let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (t, vi) in target.iter_mut().zip(&v) {
                *t -= f * vi;
            }
        };
        for j in k + 1..s {
            reflect(&mut a[j * m + k..(j + 1) * m]);
        }
        reflect(&mut y[k..]);
        diag[k] = alpha;
    }
    let mut beta = vec![0.0; s];
    for k in (0..s).rev() {
        let mut acc = y[k];
        for j in k + 1..s {
            acc -= a[j * m + k] * beta[j];
        }
        beta[k] = acc / diag[k];
    }
    let rss = y[s..].iter().map(|v| v * v).sum();
    Some((beta, rss))
}

#[allow(dead_code)]
pub(crate) fn residual_sum(data: &Dataset, rows: &[usize], mask: Mask, beta: &[f64]) -> f64 {
    rows.iter()
        .map(|&i| {
            let r = data.response()[i] - super::linear_predictor_at(data, i, mask, beta);
            r * r
        })
        .sum()
}
