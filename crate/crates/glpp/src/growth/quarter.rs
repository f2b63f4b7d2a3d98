use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{GlppError, Result};
use crate::harness::CellUniforms;
use crate::measures::{FamilyKind, MeasureFamily};

/// Arrival times on an N x N box of the quarter-plane, with the zero row and
/// column as boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarterField {
    n: usize,
    tau: Vec<u64>,
    until: u64,
}

impl QuarterField {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn until(&self) -> u64 {
        self.until
    }

    pub fn tau(&self, x: usize, y: usize) -> u64 {
        self.tau[y * self.n + x]
    }

    /// For each x, the largest y with τ(x, y) ≤ t (the staircase boundary
    /// of C_t); None where the column is entirely above t.
    pub fn front(&self, t: u64) -> Vec<Option<usize>> {
        (0..self.n)
            .map(|x| {
                // τ(x, ·) is nondecreasing, strictly after the boundary.
                let (mut lo, mut hi) = (0usize, self.n);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.tau(x, mid) <= t {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                lo.checked_sub(1)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,tau\n");
        for y in 0..self.n {
            for x in 0..self.n {
                let t = self.tau(x, y);
                if t <= self.until {
                    let _ = writeln!(s, "{x},{y},{t}");
                }
            }
        }
        s
    }
}

/// τ(x, y) = max(τ(x, y-1), τ(x-1, y)) + ξ over the whole box, in row-major
/// order (each cell only needs the row below and the cell to its left).
fn sweep(n: usize, fam: &MeasureFamily, cells: &CellUniforms, origin: (usize, usize)) -> Vec<u64> {
    let mut tau = vec![0u64; n * n];
    let constant = fam.kind() == FamilyKind::Constant;
    let base = fam.base().clone();
    for y in 1..n {
        for x in 1..n {
            let (a, c) = (tau[(y - 1) * n + x], tau[y * n + x - 1]);
            let u = cells.uniform((origin.0 + x) as i64, (origin.1 + y) as i64);
            let xi = if constant { base.sample(u) } else { fam.at(a.abs_diff(c)).sample(u) };
            tau[y * n + x] = a.max(c) + xi;
        }
    }
    tau
}

/// Grows the quarter-plane inside an N x N box. Fails when a cell on the far
/// edge of the box arrives by `until`, since C_until is then cut by the box.
pub fn grow_quarter_plane(n: usize, fam: &MeasureFamily, until: u64, seed: u64) -> Result<QuarterField> {
    grow_quarter_plane_with(n, fam, until, &CellUniforms::new(seed))
}

pub fn grow_quarter_plane_with(n: usize, fam: &MeasureFamily, until: u64, cells: &CellUniforms) -> Result<QuarterField> {
    if n < 2 {
        return Err(GlppError::BoxExhausted { n, until });
    }
    let tau = sweep(n, fam, cells, (0, 0));
    let field = QuarterField { n, tau, until };
    let edge_hit = (1..n).any(|k| field.tau(n - 1, k) <= until || field.tau(k, n - 1) <= until);
    if edge_hit {
        return Err(GlppError::BoxExhausted { n, until });
    }
    Ok(field)
}

/// Result of [`superadditivity_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperaddReport {
    pub family: String,
    pub z1: (usize, usize),
    pub z2: (usize, usize),
    pub replicas: usize,
    pub violations: usize,
    pub violation_rate: f64,
    /// Mean of τ(z₁+z₂) − τ(z₁) − τ'(z₂).
    pub mean_slack: f64,
    pub min_slack: i64,
}

/// Pathwise check of τ(z₁+z₂) ≥ τ(z₁) + τ'(z₂), where τ' is grown from the
/// boundary through z₁ with the same per-cell uniforms (inverse-cdf
/// coupling). A diagnostic, not a proof of the distributional statement.
pub fn superadditivity_probe(
    fam: &MeasureFamily,
    z1: (usize, usize),
    z2: (usize, usize),
    replicas: usize,
    seed: u64,
) -> SuperaddReport {
    let (mut violations, mut slack_sum, mut min_slack) = (0usize, 0.0f64, i64::MAX);
    let n = z1.0.max(z1.1) + z2.0.max(z2.1) + 1;
    let m = z2.0.max(z2.1) + 1;
    for r in 0..replicas {
        let cells = CellUniforms::new(seed.wrapping_add((r as u64).wrapping_mul(0x9e37_79b9)));
        let full = sweep(n, fam, &cells, (0, 0));
        let shifted = sweep(m, fam, &cells, z1);
        let t1 = full[z1.1 * n + z1.0];
        let t12 = full[(z1.1 + z2.1) * n + z1.0 + z2.0];
        let t2 = shifted[z2.1 * m + z2.0];
        let slack = t12 as i64 - t1 as i64 - t2 as i64;
        if slack < 0 {
            violations += 1;
        }
        slack_sum += slack as f64;
        min_slack = min_slack.min(slack);
    }
    SuperaddReport {
        family: fam.label().to_string(),
        z1,
        z2,
        replicas,
        violations,
        violation_rate: violations as f64 / replicas.max(1) as f64,
        mean_slack: slack_sum / replicas.max(1) as f64,
        min_slack: if replicas == 0 { 0 } else { min_slack },
    }
}
