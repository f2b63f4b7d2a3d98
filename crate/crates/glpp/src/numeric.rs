//! Small numerical helpers shared by the modules: compensated sums,
//! log-space accumulation, zeta tails and semi-infinite quadrature.

use crate::error::{GlppError, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// ln(Σ exp(x_i)); returns -inf for an empty or all -inf input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + compensated(xs.iter().map(|x| (x - m).exp())).ln()
}

/// Euler-Maclaurin estimate of Σ_{i ≥ n} i^{-s}, valid for s > 1 and n ≥ 10.
pub fn zeta_tail(s: f64, n: u64) -> f64 {
    let n = n as f64;
    n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

/// Riemann zeta for s > 1.
pub fn zeta(s: f64) -> f64 {
    const N: u64 = 64;
    compensated((1..N).map(|i| (i as f64).powf(-s))) + zeta_tail(s, N)
}

/// ∫_a^∞ f(x) dx with the substitution x = a + u/(1-u).
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<(f64, f64)> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        let v = f(a + u / w) / (w * w);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let out = quadrature::double_exponential::integrate(g, 0.0, 1.0, tol);
    check_quadrature(out, tol)
}

/// ∫_a^b f(x) dx.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if b <= a {
        return Ok((0.0, 0.0));
    }
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    check_quadrature(out, tol)
}

fn check_quadrature(out: quadrature::Output, tol: f64) -> Result<(f64, f64)> {
    if !out.integral.is_finite() {
        return Err(GlppError::QuadratureFailure("non-finite integral".into()));
    }
    // The double-exponential rule reports a pessimistic estimate; allow a
    // generous factor before declaring failure.
    if out.error_estimate > 1e3 * tol.max(1e-15) && out.error_estimate > 1e-6 * out.integral.abs() {
        return Err(GlppError::QuadratureFailure(format!(
            "error estimate {:e} above tolerance {:e}",
            out.error_estimate, tol
        )));
    }
    Ok((out.integral, out.error_estimate))
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_matches_known_values() {
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((zeta(2.0) - z2).abs() < 1e-13);
        let z6 = std::f64::consts::PI.powi(6) / 945.0;
        assert!((zeta(6.0) - z6).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_handles_underflow() {
        let v = log_sum_exp(&[-800.0, -800.0]);
        assert!((v - (-800.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn semi_infinite_exponential() {
        let (v, _) = integrate_semi_infinite(|x| (-x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(16, 8), 12870.0);
    }
}
