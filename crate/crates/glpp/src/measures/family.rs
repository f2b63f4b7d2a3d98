use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{GlppError, Result};
use crate::numeric::{compensated, log_sum_exp};

use super::discrete::{DiscreteMeasure, Law};

/// How the gap-indexed family (μ_Δ) is derived from its base measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// μ_Δ = μ for every gap (classical LPP).
    Constant,
    /// μ_Δ(t) ∝ sqrt(μ₀(t) μ₀(t+Δ)).
    Integrable,
    /// Law of max(ζ₁ - Δ, ζ₂) for ζ₁, ζ₂ i.i.d. μ.
    EdgeLpp,
    /// Explicit per-gap measures; the last entry repeats for larger gaps.
    Custom,
}

struct Inner {
    kind: FamilyKind,
    base: DiscreteMeasure,
    custom: Vec<DiscreteMeasure>,
    label: String,
    cache: RwLock<HashMap<u64, DiscreteMeasure>>,
    norms: RwLock<HashMap<u64, f64>>,
}

/// The parameter μ = (μ_Δ)_Δ of the growth model. Members are built lazily
/// and cached; the family is cheap to clone and safe to share.
#[derive(Clone)]
pub struct MeasureFamily(Arc<Inner>);

impl fmt::Debug for MeasureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureFamily")
            .field("kind", &self.0.kind)
            .field("label", &self.0.label)
            .finish()
    }
}

impl MeasureFamily {
    fn build(kind: FamilyKind, base: DiscreteMeasure, custom: Vec<DiscreteMeasure>, label: String) -> Self {
        Self(Arc::new(Inner {
            kind,
            base,
            custom,
            label,
            cache: RwLock::new(HashMap::new()),
            norms: RwLock::new(HashMap::new()),
        }))
    }

    pub fn constant(mu: DiscreteMeasure) -> Self {
        let label = format!("constant({})", mu.label());
        Self::build(FamilyKind::Constant, mu, Vec::new(), label)
    }

    /// Family per the integrability condition. Fails when Σ sqrt(μ₀) is not
    /// certified finite.
    pub fn integrable(mu0: DiscreteMeasure) -> Result<Self> {
        mu0.sqrt_sum()?;
        let label = mu0.label().to_string();
        Ok(Self::build(FamilyKind::Integrable, mu0, Vec::new(), label))
    }

    pub fn edge_lpp(mu: DiscreteMeasure) -> Self {
        let label = format!("edge_lpp({})", mu.label());
        Self::build(FamilyKind::EdgeLpp, mu, Vec::new(), label)
    }

    pub fn custom(members: Vec<DiscreteMeasure>, label: impl Into<String>) -> Result<Self> {
        let first = members
            .first()
            .cloned()
            .ok_or_else(|| GlppError::InvalidMeasure("custom family needs at least one member".into()))?;
        Ok(Self::build(FamilyKind::Custom, first, members, label.into()))
    }

    pub fn kind(&self) -> FamilyKind {
        self.0.kind
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// μ₀ for integrable families, μ for constant/edge families.
    pub fn base(&self) -> &DiscreteMeasure {
        &self.0.base
    }

    /// Σ_s sqrt(μ₀(s)) for integrable families.
    pub fn sqrt_mu0_sum(&self) -> Option<f64> {
        match self.0.kind {
            FamilyKind::Integrable => self.0.base.sqrt_sum().ok().map(|(s, _)| s),
            _ => None,
        }
    }

    /// N(Δ) = Σ_s sqrt(μ₀(s) μ₀(s+Δ)), the normalizer of the integrable
    /// member at gap Δ (at most 1 by Cauchy-Schwarz).
    pub fn normalizer(&self, delta: u64) -> Option<f64> {
        if self.0.kind != FamilyKind::Integrable {
            return None;
        }
        if let Some(v) = self.0.norms.read().expect("norm cache").get(&delta) {
            return Some(*v);
        }
        self.at(delta);
        self.0.norms.read().expect("norm cache").get(&delta).copied()
    }

    /// μ_Δ.
    pub fn at(&self, delta: u64) -> DiscreteMeasure {
        match self.0.kind {
            FamilyKind::Constant => return self.0.base.clone(),
            FamilyKind::Custom => {
                let idx = (delta as usize).min(self.0.custom.len() - 1);
                return self.0.custom[idx].clone();
            }
            _ => {}
        }
        if let Some(m) = self.0.cache.read().expect("family cache").get(&delta) {
            return m.clone();
        }
        let m = match self.0.kind {
            FamilyKind::Integrable => self.build_integrable(delta),
            FamilyKind::EdgeLpp => self.build_edge(delta),
            _ => unreachable!(),
        };
        self.0.cache.write().expect("family cache").entry(delta).or_insert(m).clone()
    }

    fn build_integrable(&self, delta: u64) -> DiscreteMeasure {
        let mu0 = &self.0.base;
        if delta == 0 {
            self.0.norms.write().expect("norm cache").insert(0, 1.0);
            return mu0.clone();
        }
        let cap = mu0.cap();
        let logs: Vec<f64> = (1..=cap).map(|t| 0.5 * (mu0.log_pmf(t) + mu0.log_pmf(t + delta))).collect();
        // Past the cap both factors follow the geometric extension, so the
        // remaining series sums in closed form.
        let r = mu0.extension_ratio();
        let rem = mu0.remainder() * r.powf(delta as f64 / 2.0);
        let head = log_sum_exp(&logs).exp();
        let norm = head + rem;
        self.0.norms.write().expect("norm cache").insert(delta, norm);
        let ln_norm = norm.ln();
        let logs = logs.into_iter().map(|l| l - ln_norm).collect();
        DiscreteMeasure::from_log_parts(
            format!("{}|gap={delta}", mu0.label()),
            logs,
            rem / norm,
            mu0.remainder_err() / norm,
            mu0.is_finite_support(),
        )
        .expect("integrable member is a valid measure")
    }

    fn build_edge(&self, delta: u64) -> DiscreteMeasure {
        let mu = &self.0.base;
        let cap = mu.cap();
        let pmf: Vec<f64> = (1..=cap)
            .map(|i| {
                mu.pmf(i + delta) * mu.cdf(i - 1) + mu.pmf(i) * mu.cdf(i - 1 + delta) + mu.pmf(i) * mu.pmf(i + delta)
            })
            .collect();
        // P(max(ζ₁-Δ, ζ₂) > cap) = 1 - F(cap+Δ) F(cap).
        let (a, b) = (mu.tail(cap + delta + 1), mu.tail(cap + 1));
        let rem = a + b - a * b;
        DiscreteMeasure::from_parts(
            format!("edge_lpp({})|gap={delta}", mu.label()),
            pmf,
            rem,
            2.0 * mu.remainder_err(),
            mu.is_finite_support(),
        )
        .expect("edge member is a valid measure")
    }

    /// Precomputes members for gaps 0..=max_delta.
    pub fn materialize(&self, max_delta: u64) {
        for d in 0..=max_delta {
            self.at(d);
        }
    }
}

/// Exhaustive law of max(ζ₁ - Δ, ζ₂) for a finitely supported μ, used as an
/// independent oracle for the edge family.
pub fn edge_enumeration_oracle(mu: &[f64], delta: u64) -> Vec<f64> {
    let n = mu.len();
    let mut out = vec![0.0; n];
    for (a, pa) in mu.iter().enumerate() {
        for (b, pb) in mu.iter().enumerate() {
            let z1 = a as i64 + 1 - delta as i64;
            let z2 = b as i64 + 1;
            let v = z1.max(z2) as usize;
            out[v - 1] += pa * pb;
        }
    }
    out
}

/// ε-perturbation of one mass of μ_Δ (renormalized), keeping every other
/// member of the family unchanged. Used as a negative control.
pub fn perturbed_family(fam: &MeasureFamily, delta: u64, entry: u64, eps: f64, max_delta: u64) -> Result<MeasureFamily> {
    let mut members = Vec::new();
    for d in 0..=max_delta.max(delta) + 1 {
        let m = fam.at(d);
        if d != delta {
            members.push(m);
            continue;
        }
        let mut logs: Vec<f64> = (1..=m.cap()).map(|i| m.log_pmf(i)).collect();
        let idx = entry as usize - 1;
        logs[idx] = (logs[idx].exp() + eps).ln();
        members.push(DiscreteMeasure::from_log_parts(
            format!("{}+eps", m.label()),
            logs,
            m.remainder(),
            m.remainder_err(),
            m.is_finite_support(),
        )?);
    }
    MeasureFamily::custom(members, format!("perturbed({})", fam.label()))
}

/// Direct evaluation of Σ_{s≥1} sqrt(μ₀(s) μ₀(s+Δ)) by partial summation,
/// independent of the cached family path.
pub fn partial_sum_normalizer(mu0: &Law, delta: u64, terms: u64) -> Result<f64> {
    let m = DiscreteMeasure::from_law_with_cap(mu0, Some(terms + delta + 1))?;
    Ok(compensated((1..=terms).map(|s| (m.pmf(s) * m.pmf(s + delta)).sqrt())))
}
