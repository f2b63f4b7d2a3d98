use crate::error::{GlppError, Result};
use crate::measures::{DiscreteMeasure, MeasureFamily};
use super::weights::ln_pair_sum;
use crate::numeric::compensated;

/// The pair of kernels M⁻(s; u) ∝ √μ₀(u-s) α^{u-s} and M⁺(u; t) ∝
/// √μ₀(u-t) α^{-(u-t)}, stored as profiles in the increment. Entries beyond
/// the stored range are evaluated from μ₀ directly.
#[derive(Debug, Clone)]
pub struct TransferKernel {
    mu0: DiscreteMeasure,
    cap: u64,
    alpha: f64,
    ln_alpha: f64,
    /// ln of the two normalizers Σ_v √μ₀(v) α^{±v}.
    ln_norm_minus: f64,
    ln_norm_plus: f64,
    minus: Vec<f64>,
    plus: Vec<f64>,
    tail_bound: f64,
}

/// Σ_{v≥1} √μ₀(v) x^v with the geometric extension summed in closed form.
fn weighted_sqrt_sum(mu0: &DiscreteMeasure, x: f64) -> Result<f64> {
    let cap = mu0.cap();
    let head = compensated((1..=cap).map(|v| mu0.sqrt_pmf(v) * x.powf(v as f64)));
    let r = mu0.extension_ratio();
    if r == 0.0 {
        return Ok(head);
    }
    let q = r.sqrt() * x;
    if q >= 1.0 {
        return Err(GlppError::DivergentSqrtSum(format!("{} with alpha factor {x}", mu0.label())));
    }
    Ok(head + mu0.sqrt_pmf(cap) * x.powf(cap as f64) * q / (1.0 - q))
}

impl TransferKernel {
    /// Kernels of the integrable family with base μ₀, profiles stored for
    /// increments up to `cap`.
    pub fn new(fam: &MeasureFamily, cap: u64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(GlppError::InvalidMeasure(format!("alpha must be positive, got {alpha}")));
        }
        let mu0 = fam.base().clone();
        mu0.sqrt_sum()?;
        let nm = weighted_sqrt_sum(&mu0, alpha)?;
        let np = weighted_sqrt_sum(&mu0, 1.0 / alpha)?;
        let ln_alpha = alpha.ln();
        let profile = |sign: f64, ln_n: f64| -> Vec<f64> {
            (0..=cap)
                .map(|d| if d == 0 { 0.0 } else { (0.5 * mu0.log_pmf(d) + sign * d as f64 * ln_alpha - ln_n).exp() })
                .collect()
        };
        let minus = profile(1.0, nm.ln());
        let plus = profile(-1.0, np.ln());
        let tail_bound = (1.0 - compensated(minus.iter().copied())).max(1.0 - compensated(plus.iter().copied())).max(0.0);
        Ok(Self { mu0, cap, alpha, ln_alpha, ln_norm_minus: nm.ln(), ln_norm_plus: np.ln(), minus, plus, tail_bound })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Row mass of either kernel beyond the stored increments.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    fn entry(&self, d: i64, sign: f64, profile: &[f64], ln_n: f64) -> f64 {
        if d <= 0 {
            return 0.0;
        }
        match profile.get(d as usize) {
            Some(v) => *v,
            None => (0.5 * self.mu0.log_pmf(d as u64) + sign * d as f64 * self.ln_alpha - ln_n).exp(),
        }
    }

    /// M⁻(s; u), nonzero for u > s.
    pub fn m_minus(&self, s: i64, u: i64) -> f64 {
        self.entry(u - s, 1.0, &self.minus, self.ln_norm_minus)
    }

    /// M⁺(u; t), nonzero for u > t.
    pub fn m_plus(&self, u: i64, t: i64) -> f64 {
        self.entry(u - t, -1.0, &self.plus, self.ln_norm_plus)
    }

    /// (M⁻M⁺)(s; t) = Σ_u M⁻(s; u) M⁺(u; t). The α factors combine to
    /// α^{t-s}, leaving a pair sum that is evaluated in closed form.
    pub fn minus_plus(&self, s: i64, t: i64) -> f64 {
        let hi = s.max(t);
        let ln = ln_pair_sum(&self.mu0, (hi - s) as u64, (hi - t) as u64);
        (ln + (t - s) as f64 * self.ln_alpha - self.ln_norm_minus - self.ln_norm_plus).exp()
    }

    /// (M⁺M⁻)(u; v) = Σ_w M⁺(u; w) M⁻(w; v) by explicit summation over the
    /// `cap` + 1 largest w < min(u, v); the rest is below
    /// [`TransferKernel::tail_bound`].
    pub fn plus_minus(&self, u: i64, v: i64) -> f64 {
        let hi = u.min(v) - 1;
        compensated((0..=self.cap as i64).map(|k| {
            let w = hi - k;
            self.m_plus(u, w) * self.m_minus(w, v)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Law;

    #[test]
    fn geometric_entries() {
        let fam = MeasureFamily::integrable(DiscreteMeasure::from_law(&Law::Geometric { p: 0.5 }).unwrap()).unwrap();
        let k = TransferKernel::new(&fam, 80, 1.0).unwrap();
        let c = 2f64.sqrt() + 1.0;
        // Σ√μ₀ = √0.5 / (1 - √0.5) = 1 + √2.
        assert!((k.m_minus(0, 1) - 0.5f64.sqrt() / c).abs() < 1e-14);
        assert_eq!(k.m_minus(3, 3), 0.0);
        assert!((k.minus_plus(0, 0) - 1.0 / (c * c)).abs() < 1e-12);
        assert!(k.tail_bound() < 1e-10);
    }
}
