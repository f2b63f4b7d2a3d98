use serde::{Deserialize, Serialize};

use crate::bridges::{validate_timed, Bridge};
use crate::error::{GlppError, Result};
use crate::measures::{DiscreteMeasure, MeasureFamily};
use crate::numeric::log_sum_exp;

/// The three equivalent expressions of the unnormalized stationary weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WForm {
    /// Every √μ₀ factor divided by Σ√μ₀, with the survival factor at maxima.
    Normalized,
    /// The same without the Σ√μ₀ normalization.
    Simple,
    /// Survival factor folded into a single pair sum at each maximum.
    Reduced,
}

impl WForm {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(WForm::Normalized),
            2 => Some(WForm::Simple),
            3 => Some(WForm::Reduced),
            _ => None,
        }
    }
}

/// ln Σ_{s≥1} √(μ₀(s+a) μ₀(s+b)). Past the cap both factors follow the
/// geometric extension, so the tail of the series is summed in closed form.
pub fn ln_pair_sum(mu0: &DiscreteMeasure, a: u64, b: u64) -> f64 {
    let cap = mu0.cap();
    let k = (cap + 1).saturating_sub(a.min(b)).max(1);
    let term = |s: u64| 0.5 * (mu0.log_pmf(s + a) + mu0.log_pmf(s + b));
    let mut logs: Vec<f64> = (1..k).map(term).collect();
    let r = mu0.extension_ratio();
    if r > 0.0 {
        logs.push(term(k) - (-r).ln_1p());
    }
    log_sum_exp(&logs)
}

fn check(b: &Bridge, t: &[u64]) -> Result<()> {
    validate_timed(b, t).map_err(|v| GlppError::InvalidBridge(v.to_string()))
}

/// ln W_(b,t) in the requested form. Forms `Simple` and `Reduced` agree;
/// `Normalized` is `Simple` times (Σ√μ₀)^{-2L}.
pub fn weight_w(b: &Bridge, t: &[u64], fam: &MeasureFamily, form: WForm) -> Result<f64> {
    check(b, t)?;
    let mu0 = fam.base();
    let (s, _) = mu0.sqrt_sum()?;
    let n = b.len();
    let mut ln_w = 0.0;
    for i in 0..n {
        let k = (i + 1) % n;
        let (ti, tk) = (t[i], t[k]);
        match (b.step(i), b.step(k)) {
            (1, -1) => {
                ln_w += match form {
                    WForm::Reduced => ln_pair_sum(mu0, ti, tk),
                    _ => {
                        let hi = ti.max(tk);
                        // Σ_{s > max} √μ₀(s - t_i) √μ₀(s - t_{i+1}), then the
                        // survival Σ_{s ≥ 1} μ_Δ(min + s).
                        let red = ln_pair_sum(mu0, hi - ti, hi - tk);
                        red + fam.at(ti.abs_diff(tk)).log_tail(ti.min(tk) + 1)
                    }
                }
            }
            (-1, 1) => {}
            _ => ln_w += 0.5 * mu0.log_pmf(ti.abs_diff(tk)),
        }
    }
    if form == WForm::Normalized {
        ln_w -= 2.0 * b.l() as f64 * s.ln();
    }
    Ok(ln_w)
}

/// The max-pair factor of the simple form next to its reduced value, for
/// checking the collapse identity pair by pair.
pub fn max_pair_identity(fam: &MeasureFamily, a: u64, c: u64) -> (f64, f64) {
    let mu0 = fam.base();
    let hi = a.max(c);
    let lhs = ln_pair_sum(mu0, hi - a, hi - c) + fam.at(a.abs_diff(c)).log_tail(a.min(c) + 1);
    (lhs.exp(), ln_pair_sum(mu0, a, c).exp())
}
