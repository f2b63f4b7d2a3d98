//! The cellular-automaton view of GLPP: the transition T, the zigzag
//! kernels, and checks of the identities that make the stationary law
//! explicit.

mod hzmm;
mod identities;
mod spacetime;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::measures::MeasureFamily;

pub use hzmm::{front_line_kernel_weight, hzmm_bridge_weight, hzmm_values};
pub use identities::{check_belyaev, check_commutation, check_stable_identity, derive_cond_int, BelyaevGrid, StableGrid};
pub use spacetime::{iterate_space_time, iterate_space_time_with, SpaceTime};

/// T(a, b; c) = μ_{|b-a|}(c - max(a, b)).
#[derive(Debug, Clone)]
pub struct PcaTransition {
    fam: MeasureFamily,
}

impl PcaTransition {
    pub fn new(fam: MeasureFamily) -> Self {
        Self { fam }
    }

    pub fn family(&self) -> &MeasureFamily {
        &self.fam
    }

    pub fn t(&self, a: i64, b: i64, c: i64) -> f64 {
        let hi = a.max(b);
        if c <= hi {
            return 0.0;
        }
        self.fam.at(a.abs_diff(b)).pmf((c - hi) as u64)
    }

    /// Σ_c T(a, b; c), including the mass past the stored profile.
    pub fn row_sum(&self, a: i64, b: i64) -> f64 {
        let m = self.fam.at(a.abs_diff(b));
        crate::numeric::compensated((1..=m.cap()).map(|v| m.pmf(v))) + m.remainder()
    }
}

/// Outcome of an identity check over a finite grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub identity: String,
    pub family: String,
    pub grid: BTreeMap<String, i64>,
    pub points: usize,
    /// Largest |lhs - rhs| / max(|lhs|, |rhs|).
    pub max_residual: f64,
    pub max_abs_residual: f64,
    /// Grid point where `max_residual` is attained.
    pub witness: Option<Vec<i64>>,
    /// Bound on the error of any truncated series entering either side.
    pub truncation_bound: f64,
}

impl ResidualReport {
    fn new(identity: &str, family: &str, grid: &[(&str, i64)]) -> Self {
        Self {
            identity: identity.into(),
            family: family.into(),
            grid: grid.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            points: 0,
            max_residual: 0.0,
            max_abs_residual: 0.0,
            witness: None,
            truncation_bound: 0.0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, at: &[i64]) {
        self.points += 1;
        let abs = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        let rel = if abs == 0.0 { 0.0 } else { abs / scale };
        self.max_abs_residual = self.max_abs_residual.max(abs);
        if rel > self.max_residual || self.witness.is_none() {
            self.max_residual = self.max_residual.max(rel);
            self.witness = Some(at.to_vec());
        }
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
