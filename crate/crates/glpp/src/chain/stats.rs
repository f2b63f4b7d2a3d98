use serde::Serialize;

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// |a - b| within k combined standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * (self.se * self.se + other.se * other.se).sqrt()
    }
}

/// Sums over one block of consecutive steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Batch {
    pub n: u64,
    pub t1_sum: f64,
    pub flips: u64,
}

/// Mean and batch-means standard error of per-batch ratios Σx/n.
pub(crate) fn batch_estimate(batches: &[Batch], value: impl Fn(&Batch) -> f64) -> Estimate {
    let full: Vec<&Batch> = batches.iter().filter(|b| b.n > 0).collect();
    let n: u64 = full.iter().map(|b| b.n).sum();
    if n == 0 {
        return Estimate { value: f64::NAN, se: f64::NAN };
    }
    let mean = full.iter().map(|b| value(b)).sum::<f64>() / n as f64;
    let k = full.len();
    if k < 2 {
        return Estimate { value: mean, se: f64::INFINITY };
    }
    let var = full
        .iter()
        .map(|b| {
            let m = value(b) / b.n as f64 - mean;
            b.n as f64 * m * m
        })
        .sum::<f64>()
        / (n as f64 * (k as f64 - 1.0));
    Estimate { value: mean, se: var.sqrt() }
}
