use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bridges::{enumerate_timed_truncated, TimedBridge};
use crate::chain::successors;
use crate::error::{GlppError, Result};
use crate::measures::MeasureFamily;
use crate::numeric::compensated;

/// Stationary leaked mass allowed under [`ClosurePolicy::LeakRenormalize`].
pub const MAX_LEAK: f64 = 1e-8;

/// What to do with transitions that leave the truncated state space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosurePolicy {
    /// Drop the leaked mass and rescale the row.
    #[default]
    LeakRenormalize,
    /// Keep the leaked mass on the current state as a self-loop.
    ReflectToCap,
}

/// The one-step kernel restricted to timed bridges with ages ≤ t_cap,
/// stored row-compressed.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    l: usize,
    t_cap: u64,
    policy: ClosurePolicy,
    states: Vec<TimedBridge>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// Mass of each row's transitions beyond the cap, before closure.
    leak: Vec<f64>,
}

/// Builds the kernel from the chain's own successor enumeration.
pub fn truncated_transition_matrix(
    l: usize,
    fam: &MeasureFamily,
    t_cap: u64,
    policy: ClosurePolicy,
) -> Result<TransitionMatrix> {
    let states = enumerate_timed_truncated(l, t_cap)?;
    let index: HashMap<&TimedBridge, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut leak = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut lost = 0.0;
        for (next, p) in successors(s, fam)? {
            if p == 0.0 {
                continue;
            }
            match index.get(&next) {
                Some(&j) => row.push((j, p)),
                None => lost += p,
            }
        }
        leak.push(lost);
        match policy {
            ClosurePolicy::LeakRenormalize => {
                let kept = 1.0 - lost;
                if kept > 0.0 {
                    row.iter_mut().for_each(|e| e.1 /= kept);
                } else {
                    row = vec![(i, 1.0)];
                }
            }
            ClosurePolicy::ReflectToCap if lost > 0.0 => match row.iter_mut().find(|e| e.0 == i) {
                Some(e) => e.1 += lost,
                None => row.push((i, lost)),
            },
            ClosurePolicy::ReflectToCap => {}
        }
        row.sort_by_key(|e| e.0);
        for (j, p) in row {
            cols.push(j);
            vals.push(p);
        }
        row_ptr.push(cols.len());
    }
    Ok(TransitionMatrix { l, t_cap, policy, states, row_ptr, cols, vals, leak })
}

impl TransitionMatrix {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn t_cap(&self) -> u64 {
        self.t_cap
    }

    pub fn policy(&self) -> ClosurePolicy {
        self.policy
    }

    pub fn states(&self) -> &[TimedBridge] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_leak(&self) -> &[f64] {
        &self.leak
    }

    /// Nonzero entries (column, probability) of row i.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// π K.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; pi.len()];
        for (i, p) in pi.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            for (j, k) in self.row(i) {
                out[j] += p * k;
            }
        }
        out
    }

    /// Coordinate list "row,col,value" with 0-based state indices.
    pub fn to_coo_csv(&self) -> String {
        let mut s = String::from("row,col,value\n");
        for i in 0..self.len() {
            for (j, p) in self.row(i) {
                let _ = writeln!(s, "{i},{j},{p:e}");
            }
        }
        s
    }

    /// One line per state: index, bridge code, ages.
    pub fn states_csv(&self) -> String {
        let mut s = String::from("index,bridge,ages\n");
        for (i, st) in self.states.iter().enumerate() {
            let ages: Vec<String> = st.ages().iter().map(|a| a.to_string()).collect();
            let _ = writeln!(s, "{i},{},{}", st.bridge().code(), ages.join(" "));
        }
        s
    }
}

/// Stationary vector of a truncated kernel.
#[derive(Debug, Clone, Serialize)]
pub struct OracleStationary {
    pub l: usize,
    pub t_cap: u64,
    pub policy: ClosurePolicy,
    pub iterations: usize,
    /// ‖πK - π‖₁ at exit.
    pub residual: f64,
    /// Σ_i π_i leak_i.
    pub leaked_mass: f64,
    #[serde(skip)]
    pub pi: Vec<f64>,
    /// π aggregated by bridge.
    pub bridge_marginal: BTreeMap<String, f64>,
}

impl OracleStationary {
    /// π of one state, if it is in the truncated space.
    pub fn probability_of(&self, m: &TransitionMatrix, state: &TimedBridge) -> Option<f64> {
        m.states.iter().position(|s| s == state).map(|i| self.pi[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Power iteration from the initial front line until ‖πK - π‖₁ ≤ tol. Under
/// [`ClosurePolicy::LeakRenormalize`] the stationary leaked mass must stay
/// below [`MAX_LEAK`].
pub fn power_iterate_stationary(m: &TransitionMatrix, tol: f64, max_iters: usize) -> Result<OracleStationary> {
    power_iterate_stationary_with(m, tol, max_iters, MAX_LEAK)
}

/// [`power_iterate_stationary`] with an explicit leak limit.
pub fn power_iterate_stationary_with(m: &TransitionMatrix, tol: f64, max_iters: usize, max_leak: f64) -> Result<OracleStationary> {
    let n = m.len();
    if n == 0 {
        return Err(GlppError::EmptyGrid);
    }
    let start = TimedBridge::initial(m.l);
    let mut pi = vec![0.0; n];
    match m.states.iter().position(|s| *s == start) {
        Some(i) => pi[i] = 1.0,
        None => pi.iter_mut().for_each(|p| *p = 1.0 / n as f64),
    }
    let mut residual = f64::INFINITY;
    let mut iters = 0;
    while iters < max_iters {
        let mut next = m.left_multiply(&pi);
        let total = compensated(next.iter().copied());
        next.iter_mut().for_each(|p| *p /= total);
        residual = compensated(next.iter().zip(&pi).map(|(a, b)| (a - b).abs()));
        pi = next;
        iters += 1;
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(GlppError::NoConvergence { iters, residual });
    }
    let leaked_mass = compensated(pi.iter().zip(&m.leak).map(|(p, l)| p * l));
    if m.policy == ClosurePolicy::LeakRenormalize && leaked_mass > max_leak {
        return Err(GlppError::ExcessLeak(leaked_mass));
    }
    let mut bridge_marginal = BTreeMap::new();
    for (s, p) in m.states.iter().zip(&pi) {
        *bridge_marginal.entry(s.bridge().code()).or_insert(0.0) += p;
    }
    Ok(OracleStationary { l: m.l, t_cap: m.t_cap, policy: m.policy, iterations: iters, residual, leaked_mass, pi, bridge_marginal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_integrable_family, Law};

    fn geo(p: f64) -> MeasureFamily {
        make_integrable_family(&Law::Geometric { p }).unwrap()
    }

    #[test]
    fn rows_have_two_to_the_k_successors() {
        let m = truncated_transition_matrix(2, &geo(0.5), 10, ClosurePolicy::LeakRenormalize).unwrap();
        for (i, s) in m.states().iter().enumerate() {
            if s.ages().iter().all(|a| *a < 10) {
                assert_eq!(m.row(i).count(), 1 << s.bridge().k_b(), "{s:?}");
                assert_eq!(m.row_leak()[i], 0.0);
            }
            let total: f64 = m.row(i).map(|e| e.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_geometric_ages() {
        let m = truncated_transition_matrix(1, &geo(0.5), 30, ClosurePolicy::LeakRenormalize).unwrap();
        let st = power_iterate_stationary(&m, 1e-14, 10_000).unwrap();
        assert!(st.leaked_mass <= 0.5f64.powi(30), "{}", st.leaked_mass);
        for (s, p) in m.states().iter().zip(&st.pi) {
            let t = s.ages()[0];
            if s.ages()[0] == s.ages()[1] {
                assert!((p - 0.25 * 0.5f64.powi(t as i32)).abs() < 1e-8, "{s:?} {p}");
            }
        }
    }

    #[test]
    fn l2_marginal_and_policies() {
        let a = truncated_transition_matrix(2, &geo(0.5), 40, ClosurePolicy::LeakRenormalize).unwrap();
        let b = truncated_transition_matrix(2, &geo(0.5), 40, ClosurePolicy::ReflectToCap).unwrap();
        let sa = power_iterate_stationary(&a, 1e-12, 10_000).unwrap();
        let sb = power_iterate_stationary(&b, 1e-12, 10_000).unwrap();
        for (code, p) in &sa.bridge_marginal {
            let want = if code == "+-+-" || code == "-+-+" { 0.25 } else { 0.125 };
            assert!((p - want).abs() < 1e-8, "{code} {p}");
            assert!((p - sb.bridge_marginal[code]).abs() <= 10.0 * sa.leaked_mass.max(sb.leaked_mass) + 1e-12);
        }
        assert!(a.to_coo_csv().lines().count() == a.nnz() + 1);
    }

    #[test]
    fn excess_leak_is_reported() {
        let m = truncated_transition_matrix(1, &geo(0.1), 10, ClosurePolicy::LeakRenormalize).unwrap();
        assert!(matches!(power_iterate_stationary(&m, 1e-12, 10_000), Err(GlppError::ExcessLeak(_))));
    }
}
