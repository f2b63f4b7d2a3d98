use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bridges::{Bridge, TimedBridge};
use crate::error::{GlppError, Result};
use crate::harness::CellUniforms;
use crate::measures::MeasureFamily;

use super::stats::{batch_estimate, Batch, Estimate};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 50;

/// p_m^δ = μ_δ(m+1) / Σ_{s≥1} μ_δ(s+m), the probability that a maximum with
/// minimal age m and age gap δ flips at the next step.
pub fn flip_probability(m: u64, delta: u64, fam: &MeasureFamily) -> Result<f64> {
    let mu = fam.at(delta);
    let tail = mu.tail(m + 1);
    if tail < 1e-300 {
        return Err(GlppError::TailUnderflow(tail));
    }
    let p = if tail > 1e-250 { mu.pmf(m + 1) / tail } else { (mu.log_pmf(m + 1) - mu.log_tail(m + 1)).exp() };
    Ok(p.min(1.0))
}

/// Memo of flip probabilities keyed by (m, δ).
#[derive(Debug, Default)]
pub(crate) struct HazardCache(HashMap<(u64, u64), f64>);

impl HazardCache {
    pub(crate) fn get(&mut self, m: u64, delta: u64, fam: &MeasureFamily) -> Result<f64> {
        if let Some(p) = self.0.get(&(m, delta)) {
            return Ok(*p);
        }
        let p = flip_probability(m, delta, fam)?;
        self.0.insert((m, delta), p);
        Ok(p)
    }
}

#[inline]
fn max_params(t: &[u64], i: usize) -> (u64, u64) {
    let (a, c) = (t[i], t[(i + 1) % t.len()]);
    (a.min(c), a.abs_diff(c))
}

/// Applies one step given the flip decision of each maximum. `flips` lists
/// the flipping positions.
fn apply(b: &mut Bridge, t: &mut [u64], flips: &[usize]) {
    for a in t.iter_mut() {
        *a += 1;
    }
    let n = t.len();
    for &i in flips {
        b.flip_max(i);
        t[i] = 0;
        t[(i + 1) % n] = 0;
    }
}

/// One step of the front-line chain: every edge ages by one, except that
/// each local maximum independently flips into a minimum with fresh ages
/// (0, 0) with probability p_m^δ.
pub fn step_discrete<R: Rng + ?Sized>(state: &TimedBridge, fam: &MeasureFamily, rng: &mut R) -> Result<TimedBridge> {
    let (mut b, mut t) = state.clone().into_parts();
    let mut flips = Vec::new();
    for i in 0..b.len() {
        if b.is_max(i) {
            let (m, d) = max_params(&t, i);
            if rng.gen::<f64>() < flip_probability(m, d, fam)? {
                flips.push(i);
            }
        }
    }
    debug_assert!(b.k_b() >= 1, "a bridge always has a maximum");
    apply(&mut b, &mut t, &flips);
    Ok(TimedBridge::new_unchecked(b, t))
}

/// Exact one-step transition probability.
pub fn transition_prob(from: &TimedBridge, to: &TimedBridge, fam: &MeasureFamily) -> Result<f64> {
    let (b, t) = (from.bridge(), from.ages());
    let (b2, t2) = (to.bridge(), to.ages());
    let n = b.len();
    if b2.len() != n {
        return Ok(0.0);
    }
    let mut covered = vec![false; n];
    let mut prob = 1.0;
    for i in 0..n {
        if !b.is_max(i) {
            continue;
        }
        let k = (i + 1) % n;
        covered[i] = true;
        covered[k] = true;
        let (m, d) = max_params(t, i);
        let p = flip_probability(m, d, fam)?;
        if b2.step(i) == -1 && b2.step(k) == 1 && t2[i] == 0 && t2[k] == 0 {
            prob *= p;
        } else if b2.step(i) == 1 && b2.step(k) == -1 && t2[i] == t[i] + 1 && t2[k] == t[k] + 1 {
            prob *= 1.0 - p;
        } else {
            return Ok(0.0);
        }
    }
    for i in (0..n).filter(|&i| !covered[i]) {
        if b2.step(i) != b.step(i) || t2[i] != t[i] + 1 {
            return Ok(0.0);
        }
    }
    Ok(prob)
}

/// All 2^k successors of a state (k = number of maxima), in the order of
/// the flip-subset bitmask, with their probabilities.
pub fn successors(from: &TimedBridge, fam: &MeasureFamily) -> Result<Vec<(TimedBridge, f64)>> {
    let b = from.bridge();
    let maxima: Vec<usize> = (0..b.len()).filter(|&i| b.is_max(i)).collect();
    let probs = maxima
        .iter()
        .map(|&i| {
            let (m, d) = max_params(from.ages(), i);
            flip_probability(m, d, fam)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = maxima.len();
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0u64..(1u64 << k) {
        let flips: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).map(|j| maxima[j]).collect();
        let p: f64 = (0..k).map(|j| if mask >> j & 1 == 1 { probs[j] } else { 1.0 - probs[j] }).product();
        let (mut b2, mut t2) = from.clone().into_parts();
        apply(&mut b2, &mut t2, &flips);
        out.push((TimedBridge::new_unchecked(b2, t2), p));
    }
    Ok(out)
}

/// One-step expected change of the Lyapunov function Σ t_i.
pub fn lyapunov_drift(state: &TimedBridge, fam: &MeasureFamily) -> Result<f64> {
    let l0: u64 = state.ages().iter().sum();
    let mut e = 0.0;
    for (s, p) in successors(state, fam)? {
        e += p * s.ages().iter().sum::<u64>() as f64;
    }
    Ok(e - l0 as f64)
}

/// The chain together with the column heights of the underlying growth
/// field, so that flips can be decided from per-cell waiting times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontChain {
    bridge: Bridge,
    ages: Vec<u64>,
    heights: Vec<i64>,
    clock: u64,
}

impl FrontChain {
    /// Alternating bridge, zero ages, row 0 arrived.
    pub fn new(l: usize) -> Self {
        Self {
            bridge: Bridge::alternating(l),
            ages: vec![0; 2 * l],
            heights: (0..2 * l).map(|x| if x % 2 == 0 { 0 } else { -1 }).collect(),
            clock: 0,
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn state(&self) -> TimedBridge {
        TimedBridge::new_unchecked(self.bridge.clone(), self.ages.clone())
    }

    /// Advances one step. The pending cell above the valley of the maximum at
    /// pair (i, i+1) is (i+1, h+2); its waiting time is the inverse-cdf draw
    /// of μ_δ at that cell's uniform, and it arrives now iff that time is m+1.
    pub fn step_coupled(&mut self, fam: &MeasureFamily, cells: &CellUniforms) -> usize {
        let n = self.ages.len();
        let mut flips = Vec::new();
        for i in 0..n {
            if self.bridge.is_max(i) {
                let (m, d) = max_params(&self.ages, i);
                let col = (i + 1) % n;
                let xi = fam.at(d).sample(cells.uniform(col as i64, self.heights[col] + 2));
                debug_assert!(xi > m, "waiting time {xi} already elapsed at age {m}");
                if xi == m + 1 {
                    flips.push(i);
                }
            }
        }
        for &i in &flips {
            self.heights[(i + 1) % n] += 2;
        }
        apply(&mut self.bridge, &mut self.ages, &flips);
        self.clock += 1;
        flips.len()
    }
}

/// Settings for [`simulate_discrete_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Keep one CSV row per measured step.
    pub record: bool,
}

impl SimConfig {
    /// Burn-in defaults to a tenth of the run.
    pub fn new(steps: u64, seed: u64) -> Self {
        Self { steps, burn_in: steps / 10, seed, record: false }
    }
}

/// One recorded step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrajectoryRow {
    pub step: u64,
    pub bridge: String,
    pub t1: u64,
    pub flips: u32,
}

/// Streaming statistics of a discrete run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub l: usize,
    pub family: String,
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Visits per bridge (keyed by [`Bridge::mask`]) after burn-in.
    pub bridge_counts: BTreeMap<u128, u64>,
    pub batches: Vec<Batch>,
    pub rows: Option<Vec<TrajectoryRow>>,
}

impl Trajectory {
    pub fn measured_steps(&self) -> u64 {
        self.bridge_counts.values().sum()
    }

    /// Empirical bridge marginal keyed by bridge code.
    pub fn bridge_marginal(&self) -> BTreeMap<String, f64> {
        let n = self.measured_steps() as f64;
        let len = 2 * self.l;
        self.bridge_counts
            .iter()
            .map(|(m, c)| (Bridge::from_mask(*m, len).expect("recorded bridge").code(), *c as f64 / n))
            .collect()
    }

    pub fn mean_t1(&self) -> Estimate {
        batch_estimate(&self.batches, |b| b.t1_sum)
    }

    /// Combines independent replicas; the result does not depend on order.
    pub fn merge(&mut self, other: &Trajectory) {
        for (k, v) in &other.bridge_counts {
            *self.bridge_counts.entry(*k).or_insert(0) += v;
        }
        self.batches.extend_from_slice(&other.batches);
        self.steps += other.steps;
        self.burn_in += other.burn_in;
        self.rows = None;
    }

    pub fn to_csv(&self) -> Option<String> {
        let rows = self.rows.as_ref()?;
        let mut s = String::from("step,bridge,t1,flips\n");
        for r in rows {
            let _ = writeln!(s, "{},{},{},{}", r.step, r.bridge, r.t1, r.flips);
        }
        Some(s)
    }

    pub fn summary(&self) -> Result<TrajectorySummary> {
        let speed = estimate_speed(self)?;
        Ok(TrajectorySummary {
            l: self.l,
            family: self.family.clone(),
            seed: self.seed,
            steps: self.steps,
            burn_in: self.burn_in,
            mean_t1: self.mean_t1(),
            c_from_ages: speed.c_from_ages,
            c_from_growth: speed.c_from_growth,
            bridge_marginal: self.bridge_marginal(),
        })
    }
}

/// JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub l: usize,
    pub family: String,
    pub seed: u64,
    pub steps: u64,
    pub burn_in: u64,
    pub mean_t1: Estimate,
    pub c_from_ages: Estimate,
    pub c_from_growth: Estimate,
    pub bridge_marginal: BTreeMap<String, f64>,
}

/// Runs the chain from the alternating zero-age state with its own seeded
/// stream.
pub fn simulate_discrete(l: usize, fam: &MeasureFamily, steps: u64, burn_in: u64, seed: u64) -> Result<Trajectory> {
    simulate_discrete_with(l, fam, &SimConfig { steps, burn_in, seed, record: false })
}

pub fn simulate_discrete_with(l: usize, fam: &MeasureFamily, cfg: &SimConfig) -> Result<Trajectory> {
    if l == 0 || l > 64 {
        return Err(GlppError::CapExceeded { l, cap: 64 });
    }
    if cfg.steps <= cfg.burn_in {
        return Err(GlppError::InsufficientSamples(format!(
            "steps ({}) must exceed burn-in ({})",
            cfg.steps, cfg.burn_in
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cache = HazardCache::default();
    let mut b = Bridge::alternating(l);
    let mut t = vec![0u64; 2 * l];
    let measured = cfg.steps - cfg.burn_in;
    let batch_len = measured.div_ceil(BATCHES as u64);
    let mut batches = vec![Batch::default(); measured.div_ceil(batch_len) as usize];
    let mut counts: HashMap<u128, u64> = HashMap::new();
    let mut rows = cfg.record.then(Vec::new);
    let mut flips = Vec::with_capacity(l);
    for step in 1..=cfg.steps {
        flips.clear();
        for i in 0..2 * l {
            if b.is_max(i) {
                let (m, d) = max_params(&t, i);
                if rng.gen::<f64>() < cache.get(m, d, fam)? {
                    flips.push(i);
                }
            }
        }
        apply(&mut b, &mut t, &flips);
        if step > cfg.burn_in {
            let k = step - cfg.burn_in - 1;
            let batch = &mut batches[(k / batch_len) as usize];
            batch.n += 1;
            batch.t1_sum += t[0] as f64;
            batch.flips += flips.len() as u64;
            *counts.entry(b.mask()).or_insert(0) += 1;
            if let Some(r) = rows.as_mut() {
                r.push(TrajectoryRow { step, bridge: b.code(), t1: t[0], flips: flips.len() as u32 });
            }
        }
    }
    Ok(Trajectory {
        l,
        family: fam.label().to_string(),
        steps: cfg.steps,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
        bridge_counts: counts.into_iter().collect(),
        batches,
        rows,
    })
}

/// The two speed estimators of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedEstimate {
    /// 1 / (2 E[T₁] + 1) from the time-averaged age of edge 1.
    pub c_from_ages: Estimate,
    /// Mean height gained per step: each flip raises one of 2L columns by 2.
    pub c_from_growth: Estimate,
}

impl SpeedEstimate {
    pub fn agree_3sigma(&self) -> bool {
        self.c_from_ages.agrees_with(&self.c_from_growth, 3.0)
    }
}

pub fn estimate_speed(traj: &Trajectory) -> Result<SpeedEstimate> {
    let full = traj.batches.iter().filter(|b| b.n > 0).count();
    if full < 2 || traj.measured_steps() < 100 {
        return Err(GlppError::InsufficientSamples(format!(
            "{} measured steps in {full} batches",
            traj.measured_steps()
        )));
    }
    let t1 = traj.mean_t1();
    let d = 2.0 * t1.value + 1.0;
    let c_from_ages = Estimate { value: 1.0 / d, se: 2.0 * t1.se / (d * d) };
    let l = traj.l as f64;
    let c_from_growth = batch_estimate(&traj.batches, |b| b.flips as f64 / l);
    Ok(SpeedEstimate { c_from_ages, c_from_growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DiscreteMeasure, Law};

    fn geo(p: f64) -> MeasureFamily {
        MeasureFamily::integrable(DiscreteMeasure::from_law(&Law::Geometric { p }).unwrap()).unwrap()
    }

    fn tb(code: &str, ages: &[u64]) -> TimedBridge {
        TimedBridge::new(code.parse().unwrap(), ages.to_vec()).unwrap()
    }

    #[test]
    fn geometric_hazard_is_constant() {
        let f = geo(0.5);
        for m in 0..=10 {
            for d in 0..=10 {
                assert!((flip_probability(m, d, &f).unwrap() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hazard_at_origin_is_first_mass() {
        let f = MeasureFamily::integrable(DiscreteMeasure::from_law(&Law::Poisson { lambda: 1.0 }).unwrap()).unwrap();
        assert!((flip_probability(0, 0, &f).unwrap() - f.base().pmf(1)).abs() < 1e-15);
    }

    #[test]
    fn poisson_hazard_matches_partial_sums() {
        // Oracle: direct integrable masses summed to 300 terms.
        let lambda: f64 = 1.0;
        let log_mu0 = |i: u64| {
            let x = i as f64;
            -lambda + x * lambda.ln() - statrs::function::gamma::ln_gamma(x + 1.0) - (1.0 - (-lambda).exp()).ln()
        };
        let w = |t: u64| (0.5 * (log_mu0(t) + log_mu0(t + 1))).exp();
        let tail: f64 = (3..=300).map(w).sum();
        let expected = w(3) / tail;
        let f = MeasureFamily::integrable(DiscreteMeasure::from_law(&Law::Poisson { lambda }).unwrap()).unwrap();
        assert!((flip_probability(2, 1, &f).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn single_maximum_step() {
        let f = geo(0.5);
        let s = tb("+-", &[3, 3]);
        let succ = successors(&s, &f).unwrap();
        assert_eq!(succ.len(), 2);
        assert_eq!(succ[0], (tb("+-", &[4, 4]), 0.5));
        assert_eq!(succ[1], (tb("-+", &[0, 0]), 0.5));
        assert_eq!(transition_prob(&tb("+-", &[2, 2]), &tb("-+", &[0, 0]), &f).unwrap(), 0.5);
        assert_eq!(transition_prob(&s, &s, &f).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = step_discrete(&s, &f, &mut rng).unwrap();
        assert!(next == tb("+-", &[4, 4]) || next == tb("-+", &[0, 0]));
    }

    #[test]
    fn alternating_l2_has_four_successors() {
        let f = geo(0.3);
        let succ = successors(&TimedBridge::initial(2), &f).unwrap();
        assert_eq!(succ.len(), 4);
        let total: f64 = succ.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
        for (s, p) in &succ {
            assert!((transition_prob(&TimedBridge::initial(2), s, &f).unwrap() - p).abs() < 1e-15);
        }
    }

    #[test]
    fn figure_state_draws_on_its_three_maxima() {
        let f = geo(0.5);
        let s = tb("+-+--+-+", &[5, 0, 0, 4, 1, 1, 1, 1]);
        let succ = successors(&s, &f).unwrap();
        assert_eq!(succ.len(), 8);
        // Edges 5 and 8 (1-based) belong to no maximum and just age.
        for (n, _) in &succ {
            assert_eq!((n.ages()[4], n.ages()[7]), (2, 2));
        }
    }

    #[test]
    fn lyapunov_drift_negative_far_out() {
        let f = geo(0.5);
        let s = tb("+-+-", &[30, 30, 30, 30]);
        // Each age becomes 31 or 0 with equal odds: E = 4 * 15.5 against 120.
        assert!((lyapunov_drift(&s, &f).unwrap() - (62.0 - 120.0)).abs() < 1e-9);
    }

    #[test]
    fn simulation_is_reproducible() {
        let f = geo(0.5);
        let a = simulate_discrete(2, &f, 20_000, 1000, 42).unwrap();
        let b = simulate_discrete(2, &f, 20_000, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.measured_steps(), 19_000);
        assert_ne!(a, simulate_discrete(2, &f, 20_000, 1000, 43).unwrap());
        assert!(matches!(simulate_discrete(1, &f, 0, 0, 1), Err(GlppError::InsufficientSamples(_))));
    }

    #[test]
    fn near_deterministic_waiting_gives_unit_speed() {
        let mu = DiscreteMeasure::from_law(&Law::Table { pmf: vec![1.0 - 1e-9, 1e-9] }).unwrap();
        let f = MeasureFamily::constant(mu);
        let tr = simulate_discrete(2, &f, 10_000, 100, 3).unwrap();
        let sp = estimate_speed(&tr).unwrap();
        assert!(sp.c_from_ages.value > 0.99 && sp.c_from_growth.value > 0.99);
    }

    #[test]
    fn coupled_chain_matches_law_of_step() {
        // Coupled flips happen at the inverse-cdf waiting time, so at L = 1
        // the flip count over n steps is n / E[ζ] to first order.
        let f = geo(0.5);
        let cells = CellUniforms::new(9);
        let mut ch = FrontChain::new(1);
        let flips: usize = (0..20_000).map(|_| ch.step_coupled(&f, &cells)).sum();
        assert!((flips as f64 / 20_000.0 - 0.5).abs() < 0.02);
        assert_eq!(ch.clock(), 20_000);
    }
}
