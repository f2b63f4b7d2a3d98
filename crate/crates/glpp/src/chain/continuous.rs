use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bridges::{Bridge, TimedBridge};
use crate::error::{GlppError, Result};
use crate::measures::{check_noexplosion, DensityFamily};

/// Settings for [`simulate_continuous`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousConfig {
    pub horizon: f64,
    pub seed: u64,
    /// Bridge snapshot spacing (for chi-square tests on nearly independent draws).
    pub bridge_every: f64,
    /// Spacing of edge-1 age snapshots.
    pub age_every: f64,
    /// Snapshots start after this time.
    pub burn_in: f64,
    /// Hard cap on processed flips; None means 1000 per unit time per edge pair.
    pub max_events: Option<u64>,
    /// Run even when the no-explosion certificate fails.
    pub force: bool,
    pub log_events: bool,
}

impl ContinuousConfig {
    pub fn new(horizon: f64, seed: u64) -> Self {
        Self {
            horizon,
            seed,
            bridge_every: 10.0,
            age_every: 1.0,
            burn_in: horizon / 100.0,
            max_events: None,
            force: false,
            log_events: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    pos: usize,
}

impl Eq for Event {}

impl Ord for Event {
    // Min-heap on time; equal times go to the lower edge index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.pos.cmp(&self.pos))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Statistics of a continuous-time run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousTrajectory {
    pub l: usize,
    pub family: String,
    pub horizon: f64,
    pub seed: u64,
    pub flips: u64,
    /// Time spent in each bridge after burn-in, keyed by bridge code.
    pub occupation: BTreeMap<String, f64>,
    /// Bridge snapshots every `bridge_every` time units.
    pub bridge_samples: BTreeMap<String, u64>,
    /// Age of edge 1 every `age_every` time units.
    #[serde(skip)]
    pub age_samples: Vec<f64>,
    /// Largest number of flips inside one unit time window.
    pub max_events_per_unit: u64,
    pub ties: u64,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_log: Option<Vec<(f64, usize)>>,
    pub final_state: TimedBridge<f64>,
}

impl ContinuousTrajectory {
    /// Flips per unit time per column pair, the continuous mean speed.
    pub fn speed(&self) -> f64 {
        self.flips as f64 / (self.l as f64 * self.horizon)
    }
}

/// Event-driven simulation. When a local maximum forms, its absolute
/// waiting time ξ ~ f(δ, ·) is drawn once and the flip scheduled at
/// formation + ξ; all ages grow linearly in between.
pub fn simulate_continuous(l: usize, fam: &DensityFamily, cfg: &ContinuousConfig) -> Result<ContinuousTrajectory> {
    if l == 0 || l > 64 {
        return Err(GlppError::CapExceeded { l, cap: 64 });
    }
    if !(cfg.horizon > cfg.burn_in) {
        return Err(GlppError::InsufficientSamples(format!("horizon {} within burn-in {}", cfg.horizon, cfg.burn_in)));
    }
    let mut warnings = Vec::new();
    let cert = check_noexplosion(fam, 0.1, 50.0);
    if !cert.passed {
        if !cfg.force {
            return Err(GlppError::CertificateFailed(format!("no-explosion bound {} at eps 0.1", cert.value)));
        }
        warnings.push(format!("no-explosion certificate failed ({}); running anyway", cert.value));
    }
    let n = 2 * l;
    let max_events = cfg.max_events.unwrap_or((1000.0 * cfg.horizon.max(1.0) * l as f64) as u64 + 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = Bridge::alternating(l);
    // Arrival time of the face above each edge; ages are now - stamp.
    let mut stamp = vec![0.0f64; n];
    let mut heap = BinaryHeap::new();
    let schedule = |b: &Bridge, stamp: &[f64], i: usize, rng: &mut ChaCha8Rng, heap: &mut BinaryHeap<Event>| {
        let k = (i + 1) % n;
        let formed = stamp[i].max(stamp[k]);
        let delta = (stamp[i] - stamp[k]).abs();
        debug_assert!(b.is_max(i));
        let xi = fam.inv_cdf(delta, rng.gen::<f64>());
        heap.push(Event { time: formed + xi, pos: i });
    };
    for i in (0..n).step_by(2) {
        schedule(&b, &stamp, i, &mut rng, &mut heap);
    }

    let mut now = 0.0f64;
    let mut flips = 0u64;
    let mut occupation: BTreeMap<u128, f64> = BTreeMap::new();
    let mut bridge_samples: BTreeMap<u128, u64> = BTreeMap::new();
    let mut age_samples = Vec::new();
    let mut next_bridge = cfg.burn_in;
    let mut next_age = cfg.burn_in;
    let (mut window_start, mut window_count, mut max_window) = (0.0f64, 0u64, 0u64);
    let mut ties = 0u64;
    let mut last_time = f64::NEG_INFINITY;
    let mut log = cfg.log_events.then(Vec::new);

    loop {
        let ev = heap.pop().expect("a bridge always has a maximum");
        let until = ev.time.min(cfg.horizon);
        // Record snapshots and occupation over [now, until).
        while next_bridge < until {
            *bridge_samples.entry(b.mask()).or_insert(0) += 1;
            next_bridge += cfg.bridge_every;
        }
        while next_age < until {
            age_samples.push(next_age - stamp[0]);
            next_age += cfg.age_every;
        }
        let from = now.max(cfg.burn_in);
        if until > from {
            *occupation.entry(b.mask()).or_insert(0.0) += until - from;
        }
        if ev.time >= cfg.horizon {
            break;
        }
        now = ev.time;
        if now == last_time {
            ties += 1;
        }
        last_time = now;
        b.flip_max(ev.pos);
        let k = (ev.pos + 1) % n;
        stamp[ev.pos] = now;
        stamp[k] = now;
        flips += 1;
        if let Some(log) = log.as_mut() {
            log.push((now, ev.pos));
        }
        if now - window_start >= 1.0 {
            window_start = now.floor();
            window_count = 0;
        }
        window_count += 1;
        max_window = max_window.max(window_count);
        if flips > max_events {
            return Err(GlppError::EventBudgetExceeded { time: now, events: flips });
        }
        let left = (ev.pos + n - 1) % n;
        if b.is_max(left) {
            schedule(&b, &stamp, left, &mut rng, &mut heap);
        }
        if k != left && b.is_max(k) {
            schedule(&b, &stamp, k, &mut rng, &mut heap);
        }
    }
    if ties > 0 {
        warnings.push(format!("{ties} simultaneous events broken by lower edge index"));
    }
    let code = |m: &u128| Bridge::from_mask(*m, n).expect("recorded bridge").code();
    let ages: Vec<f64> = stamp.iter().map(|s| cfg.horizon - s).collect();
    Ok(ContinuousTrajectory {
        l,
        family: fam.label(),
        horizon: cfg.horizon,
        seed: cfg.seed,
        flips,
        occupation: occupation.iter().map(|(m, v)| (code(m), *v)).collect(),
        bridge_samples: bridge_samples.iter().map(|(m, v)| (code(m), *v)).collect(),
        age_samples,
        max_events_per_unit: max_window,
        ties,
        warnings,
        event_log: log,
        final_state: TimedBridge::new_unchecked(b, ages),
    })
}
