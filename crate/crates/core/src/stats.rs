//! Sample statistics and the goodness-of-fit tests used by the experiments.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{rejected, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn std_error_of_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of the unbiased sample variance, from the fourth central moment.
pub fn std_error_of_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n < 4.0 {
        return f64::NAN;
    }
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

/// Unbiased sample covariance of two equally long samples.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1) as f64
}

/// `(x - mean) / sd`; `None` when the sample has zero spread.
pub fn standardize(xs: &[f64]) -> Option<Vec<f64>> {
    let sd = variance(xs).sqrt();
    if !(sd > 0.0) {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m) / sd).collect())
}

/// Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum KsOutcome {
    Tested(KsResult),
    /// Zero sample variance, no test possible.
    Degenerate,
}

impl KsOutcome {
    pub fn result(&self) -> Option<KsResult> {
        match self {
            KsOutcome::Tested(r) => Some(*r),
            KsOutcome::Degenerate => None,
        }
    }
}

/// One-sample Kolmogorov-Smirnov test of the standardized sample against
/// N(0, 1), with the asymptotic p-value at `sqrt(n) D`.
pub fn ks_normality_test(sample: &[f64]) -> Result<KsOutcome> {
    if sample.len() < 20 {
        return Err(rejected(format!("KS test needs at least 20 values, got {}", sample.len())));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(rejected("KS sample contains non-finite values"));
    }
    let Some(mut z) = standardize(sample) else {
        return Ok(KsOutcome::Degenerate);
    };
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let n = z.len() as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsOutcome::Tested(KsResult { statistic: d, p_value: kolmogorov_q(n.sqrt() * d) }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bin boundaries as lower values; the last bin is open above.
    pub bins: Vec<u64>,
}

fn chi_square_p(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(stat)
}

/// Pearson goodness-of-fit of counts against Poisson(`lambda`), pooling
/// bins until every expected count is at least 5.
pub fn chi_square_poisson(counts: &[u64], lambda: f64) -> Result<ChiSquareResult> {
    if counts.is_empty() {
        return Err(rejected("chi-square test needs observations"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(rejected("Poisson mean must be finite and non-negative"));
    }
    let n = counts.len() as f64;
    let max = *counts.iter().max().unwrap();
    let top = max.max((lambda + 10.0 * lambda.sqrt() + 10.0) as u64);
    let mut pmf = Vec::with_capacity(top as usize + 1);
    let mut p = (-lambda).exp();
    for k in 0..=top {
        pmf.push(p);
        p *= lambda / (k + 1) as f64;
    }
    let mut observed = vec![0u64; top as usize + 1];
    for &c in counts {
        observed[c as usize] += 1;
    }
    // bins [b_i, b_{i+1}), last one open
    let mut bins = vec![0u64];
    let mut acc = 0.0;
    let mut cum = 0.0;
    for k in 0..=top {
        acc += pmf[k as usize] * n;
        cum += pmf[k as usize];
        let tail = (1.0 - cum) * n;
        if acc >= 5.0 && tail >= 5.0 {
            bins.push(k + 1);
            acc = 0.0;
        }
    }
    let mut stat = 0.0;
    for (i, &lo) in bins.iter().enumerate() {
        let hi = bins.get(i + 1).copied();
        let exp: f64 = match hi {
            Some(hi) => (lo..hi).map(|k| pmf[k as usize]).sum::<f64>() * n,
            None => (1.0 - (0..lo).map(|k| pmf[k as usize]).sum::<f64>()).max(0.0) * n,
        };
        let obs: u64 = match hi {
            Some(hi) => observed[lo as usize..hi as usize].iter().sum(),
            None => observed[lo as usize..].iter().sum(),
        };
        if exp > 0.0 {
            stat += (obs as f64 - exp).powi(2) / exp;
        } else if obs > 0 {
            stat = f64::INFINITY;
        }
    }
    let dof = bins.len() - 1;
    Ok(ChiSquareResult { statistic: stat, dof, p_value: chi_square_p(stat, dof), bins })
}

/// Pearson test that two integer samples come from the same law. Values
/// are pooled into bins whose combined count keeps every expected cell at 5
/// or more.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    if a.is_empty() || b.is_empty() {
        return Err(rejected("two-sample test needs two non-empty samples"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let need = 5.0 * total / na.min(nb);
    let mut counts: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for &x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for &x in b {
        counts.entry(x).or_default().1 += 1;
    }
    let mut bins: Vec<(u64, u64, u64)> = Vec::new(); // (lower value, count a, count b)
    let mut cur: Option<(u64, u64, u64)> = None;
    for (&v, &(ca, cb)) in &counts {
        let c = cur.get_or_insert((v, 0, 0));
        c.1 += ca;
        c.2 += cb;
        if (c.1 + c.2) as f64 >= need {
            bins.push(cur.take().unwrap());
        }
    }
    if let Some(rest) = cur {
        match bins.last_mut() {
            Some(last) => {
                last.1 += rest.1;
                last.2 += rest.2;
            }
            None => bins.push(rest),
        }
    }
    let mut stat = 0.0;
    for &(_, ca, cb) in &bins {
        let col = (ca + cb) as f64;
        for (obs, n) in [(ca as f64, na), (cb as f64, nb)] {
            let exp = col * n / total;
            stat += (obs - exp).powi(2) / exp;
        }
    }
    let dof = bins.len() - 1;
    Ok(ChiSquareResult {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
        bins: bins.iter().map(|b| b.0).collect(),
    })
}

/// Covariance matrix of the columns of `rows` (one row per observation).
pub fn covariance_matrix(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = columns.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let c = covariance(&columns[i], &columns[j]);
            m[i][j] = c;
            m[j][i] = c;
        }
    }
    m
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let k = m.len();
    if k == 0 {
        return Vec::new();
    }
    let mat = DMatrix::from_fn(k, k, |i, j| m[i][j]);
    let mut ev: Vec<f64> = SymmetricEigen::new(mat).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue is at least `-1e-9 * trace`.
pub fn is_psd(m: &[Vec<f64>]) -> bool {
    let trace: f64 = (0..m.len()).map(|i| m[i][i]).sum();
    symmetric_eigenvalues(m).first().is_none_or(|&l| l >= -1e-9 * trace.abs())
}

/// `|new - old| / |old|`; zero when both are zero.
pub fn relative_change(old: f64, new: f64) -> f64 {
    if old == new {
        0.0
    } else {
        (new - old).abs() / old.abs()
    }
}
