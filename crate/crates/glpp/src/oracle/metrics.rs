use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{GlppError, Result};
use crate::numeric::compensated;

/// ½ Σ |p_i - q_i| over a shared index set.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(GlppError::SupportMismatch(format!("{} vs {} points", p.len(), q.len())));
    }
    Ok(0.5 * compensated(p.iter().zip(q).map(|(a, b)| (a - b).abs())))
}

/// TV distance between laws given by label. Both must list the same labels.
pub fn tv_distance_keyed(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> Result<f64> {
    if p.len() != q.len() || p.keys().zip(q.keys()).any(|(a, b)| a != b) {
        let only: Vec<&String> = p.keys().filter(|k| !q.contains_key(*k)).chain(q.keys().filter(|k| !p.contains_key(*k))).collect();
        return Err(GlppError::SupportMismatch(format!("labels present on one side only: {only:?}")));
    }
    Ok(0.5 * compensated(p.values().zip(q.values()).map(|(a, b)| (a - b).abs())))
}

/// sup_x |F_n(x) - F(x)| for the empirical law of `samples`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(GlppError::InsufficientSamples("no samples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Pearson goodness-of-fit p-value of counts against cell probabilities.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> Result<f64> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(GlppError::SupportMismatch(format!("{} counts vs {} cells", counts.len(), probs.len())));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(GlppError::InsufficientSamples("no counts".into()));
    }
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(c, p)| {
            let e = p * n as f64;
            (*c as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).map_err(|e| GlppError::InvalidMeasure(e.to_string()))?;
    Ok(dist.sf(stat))
}
