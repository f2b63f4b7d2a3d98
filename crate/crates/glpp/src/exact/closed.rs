use crate::bridges::{enumerate_bridges, Bridge};
use crate::error::{GlppError, Result};
use crate::numeric::{binomial, compensated};

/// ν_L(b) ∝ (1-p)^{-k_b} for classical geometric LPP on the cylinder.
pub fn geometric_closed_form(l: usize, p: f64) -> Result<Vec<(Bridge, f64)>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GlppError::InvalidMeasure(format!("geometric needs p in (0,1), got {p}")));
    }
    if l > 8 {
        return Err(GlppError::CapExceeded { l, cap: 8 });
    }
    let bridges = enumerate_bridges(l)?;
    let ln_q = (1.0 - p).ln();
    let w: Vec<f64> = bridges.iter().map(|b| (-(b.k_b() as f64) * ln_q).exp()).collect();
    let z = compensated(w.iter().copied());
    Ok(bridges.into_iter().zip(w).map(|(b, w)| (b, w / z)).collect())
}

/// (q / (1-q))^k, the value of Σ_{i ≥ k} C(i-1, k-1) q^i.
pub fn lemma_comb(k: u64, q: f64) -> f64 {
    (q / (1.0 - q)).powi(k as i32)
}

/// Σ_{i=k}^{n} C(i-1, k-1) q^i.
pub fn lemma_comb_partial(k: u64, q: f64, n: u64) -> f64 {
    compensated((k.max(1)..=n).map(|i| binomial(i - 1, k - 1) * q.powi(i as i32)))
}

fn binom_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// C(n+1, k+1), the value of Σ_{j=k}^{n} C(j, k).
pub fn lemma_sumcomb(n: u64, k: u64) -> u128 {
    binom_u128(n + 1, k + 1)
}

/// Σ_{j=k}^{n} C(j, k) by direct summation.
pub fn sumcomb_direct(n: u64, k: u64) -> u128 {
    (k..=n).map(|j| binom_u128(j, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clascyl_l2() {
        let nu = geometric_closed_form(2, 0.5).unwrap();
        for (b, p) in nu {
            assert!((p - if b.k_b() == 2 { 0.25 } else { 0.125 }).abs() < 1e-15);
        }
        assert!(geometric_closed_form(1, 0.9).unwrap().iter().all(|(_, p)| (*p - 0.5).abs() < 1e-15));
        let near_zero = geometric_closed_form(3, 1e-12).unwrap();
        assert!(near_zero.iter().all(|(_, p)| (*p - 0.05).abs() < 1e-9));
    }

    #[test]
    fn comb_lemmas() {
        assert_eq!(lemma_comb(2, 0.5), 1.0);
        assert!((lemma_comb_partial(2, 0.5, 60) - 1.0).abs() < 1e-12);
        assert!((lemma_comb(1, 0.25) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(lemma_sumcomb(5, 2), 20);
        assert_eq!(sumcomb_direct(5, 2), 20);
        for n in 0..40 {
            for k in 0..=n {
                assert_eq!(lemma_sumcomb(n, k), sumcomb_direct(n, k));
            }
        }
    }
}
