use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{GlppError, Result};
use crate::numeric::integrate_semi_infinite;

use super::conditions::CertificateReport;

/// Base densities on (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DensityLaw {
    /// λ e^{-λx}.
    Exponential { lambda: f64 },
    /// sqrt(2/π)/σ · e^{-x²/(2σ²)}.
    HalfNormal { sigma: f64 },
}

impl DensityLaw {
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            DensityLaw::Exponential { lambda } => lambda * (-lambda * x).exp(),
            DensityLaw::HalfNormal { sigma } => {
                (2.0 / std::f64::consts::PI).sqrt() / sigma * (-x * x / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            DensityLaw::Exponential { lambda } => format!("exp:{lambda}"),
            DensityLaw::HalfNormal { sigma } => format!("half_normal:{sigma}"),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DensityLaw::Exponential { lambda } => lambda > 0.0 && lambda.is_finite(),
            DensityLaw::HalfNormal { sigma } => sigma > 0.0 && sigma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(GlppError::InvalidMeasure(format!("bad parameter in {}", self.label())))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DensityKind {
    Constant,
    Integrable,
}

/// Continuous-time family f(Δ, ·) of densities on (0, ∞).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFamily {
    kind: DensityKind,
    base: DensityLaw,
    sqrt_integral: f64,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

impl DensityFamily {
    pub fn constant(base: DensityLaw) -> Result<Self> {
        base.validate()?;
        let sqrt_integral = sqrt_integral(&base)?;
        Ok(Self { kind: DensityKind::Constant, base, sqrt_integral })
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn base(&self) -> DensityLaw {
        self.base
    }

    pub fn label(&self) -> String {
        match self.kind {
            DensityKind::Constant => format!("constant({})", self.base.label()),
            DensityKind::Integrable => self.base.label(),
        }
    }

    /// ∫ sqrt(f₀).
    pub fn sqrt_integral(&self) -> f64 {
        self.sqrt_integral
    }

    /// Gap parameter actually used by the member at Δ.
    fn gap(&self, delta: f64) -> f64 {
        match self.kind {
            DensityKind::Constant => 0.0,
            DensityKind::Integrable => delta.max(0.0),
        }
    }

    /// ∫ sqrt(f₀(s) f₀(s+Δ)) ds in closed form.
    pub fn normalizer(&self, delta: f64) -> f64 {
        let d = self.gap(delta);
        match self.base {
            DensityLaw::Exponential { lambda } => (-lambda * d / 2.0).exp(),
            DensityLaw::HalfNormal { sigma } => {
                (-d * d / (8.0 * sigma * sigma)).exp() * erfc(d / (2.0 * SQRT2 * sigma))
            }
        }
    }

    /// The same normalizer by adaptive quadrature.
    pub fn normalizer_quadrature(&self, delta: f64) -> Result<f64> {
        let d = self.gap(delta);
        let b = self.base;
        let (v, err) = integrate_semi_infinite(|s| (b.density(s) * b.density(s + d)).sqrt(), 0.0, 1e-12)?;
        if err > 1e-9 {
            return Err(GlppError::QuadratureFailure(format!("normalizer error {err:e}")));
        }
        Ok(v)
    }

    /// f(Δ, x).
    pub fn density(&self, delta: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let d = self.gap(delta);
        match self.base {
            DensityLaw::Exponential { .. } => self.base.density(x),
            DensityLaw::HalfNormal { sigma } => {
                let a = d / (2.0 * SQRT2 * sigma);
                let z = x + d / 2.0;
                (-z * z / (2.0 * sigma * sigma)).exp() / (sigma * (std::f64::consts::PI / 2.0).sqrt() * erfc(a))
            }
        }
    }

    /// ∫_x^∞ f(Δ, s) ds.
    pub fn tail(&self, delta: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let d = self.gap(delta);
        match self.base {
            DensityLaw::Exponential { lambda } => (-lambda * x).exp(),
            DensityLaw::HalfNormal { sigma } => {
                let a = d / (2.0 * SQRT2 * sigma);
                erfc((x + d / 2.0) / (SQRT2 * sigma)) / erfc(a)
            }
        }
    }

    pub fn cdf(&self, delta: f64, x: f64) -> f64 {
        match self.base {
            DensityLaw::Exponential { lambda } => -(-lambda * x.max(0.0)).exp_m1(),
            _ => 1.0 - self.tail(delta, x),
        }
    }

    /// Inverse cdf.
    pub fn inv_cdf(&self, delta: f64, u: f64) -> f64 {
        let d = self.gap(delta);
        match self.base {
            DensityLaw::Exponential { lambda } => -(-u).ln_1p() / lambda,
            DensityLaw::HalfNormal { sigma } => {
                let a = d / (2.0 * SQRT2 * sigma);
                let target = (1.0 - u) * erfc(a);
                (SQRT2 * sigma * erfc_inv(target) - d / 2.0).max(f64::MIN_POSITIVE)
            }
        }
    }

    /// Hazard f(δ, m) / ∫ f(δ, s + m) ds, the flip rate of a maximum.
    pub fn flip_rate(&self, m: f64, delta: f64) -> Result<f64> {
        let tail = self.tail(delta, m);
        if !(tail > 0.0) {
            return Err(GlppError::QuadratureFailure(format!("tail at m={m} vanishes")));
        }
        let m = if m <= 0.0 { f64::MIN_POSITIVE } else { m };
        Ok(self.density(delta, m) / tail)
    }
}

/// Builds the integrable family f(Δ, x) ∝ sqrt(f₀(x) f₀(x+Δ)) after
/// certifying ∫ sqrt(f₀) < ∞ by quadrature.
pub fn make_integrable_density_family(f0: DensityLaw) -> Result<DensityFamily> {
    f0.validate()?;
    let sqrt_integral = sqrt_integral(&f0)?;
    Ok(DensityFamily { kind: DensityKind::Integrable, base: f0, sqrt_integral })
}

fn sqrt_integral(f0: &DensityLaw) -> Result<f64> {
    let (v, err) = integrate_semi_infinite(|x| f0.density(x).sqrt(), 0.0, 1e-12)?;
    if !(v.is_finite()) || err > 1e-9 {
        return Err(GlppError::QuadratureFailure(format!("integral of sqrt(f0) not certified (err {err:e})")));
    }
    Ok(v)
}

/// Grid certificate of sup_Δ μ_Δ([0, ε]) < 1.
pub fn check_noexplosion(fam: &DensityFamily, eps: f64, delta_max: f64) -> CertificateReport {
    let mut notes = Vec::new();
    if eps <= 0.0 {
        notes.push("degenerate epsilon: the bound is trivially zero".into());
        return CertificateReport {
            condition: "no explosion".into(),
            grid: format!("eps = {eps}"),
            passed: true,
            value: 0.0,
            witness: None,
            notes,
        };
    }
    let steps = 200;
    let (mut sup, mut at) = (0.0f64, 0.0);
    for k in 0..=steps {
        let d = delta_max * k as f64 / steps as f64;
        let v = fam.cdf(d, eps);
        if v > sup {
            sup = v;
            at = d;
        }
    }
    notes.push(format!("alpha = {sup} at eps = {eps}"));
    CertificateReport {
        condition: "no explosion".into(),
        grid: format!("eps = {eps}, gap in [0, {delta_max}] ({} points)", steps + 1),
        passed: sup < 1.0,
        value: sup,
        witness: Some(vec![eps, at]),
        notes,
    }
}
