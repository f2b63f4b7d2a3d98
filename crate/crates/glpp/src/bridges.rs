//! Front-line combinatorics: bridges, timed bridges and their age
//! constraints, local extrema, and enumerations for the oracles.
//!
//! Internally everything is 0-based: step `i` is the edge between columns
//! `i` and `i+1`, and the pair at position `i` is `(i, i+1 mod 2L)`. Only
//! [`pair_label`] converts to the 1-based labels used in messages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{GlppError, Result};

/// Largest L accepted by [`enumerate_bridges`] unless a cap is given.
pub const DEFAULT_BRIDGE_CAP: usize = 8;
/// State-count guard for [`enumerate_timed_truncated`].
pub const MAX_TIMED_STATES: u64 = 3_000_000;

/// 1-based label "(i,j)" of the cyclic pair at 0-based position `i`.
pub fn pair_label(i: usize, len: usize) -> (usize, usize) {
    (i + 1, (i + 1) % len + 1)
}

/// A cyclic ±1 sequence of length 2L with zero sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bridge(Vec<i8>);

impl Bridge {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        if steps.is_empty() || steps.len() % 2 != 0 {
            return Err(GlppError::InvalidBridge(format!("length {} is not a positive even number", steps.len())));
        }
        if steps.iter().any(|s| *s != 1 && *s != -1) {
            return Err(GlppError::InvalidBridge("steps must be +1 or -1".into()));
        }
        let sum: i64 = steps.iter().map(|s| *s as i64).sum();
        if sum != 0 {
            return Err(GlppError::InvalidBridge(format!("steps sum to {sum}")));
        }
        Ok(Self(steps))
    }

    /// (+1, -1, +1, -1, ...), the front line of the initial row.
    pub fn alternating(l: usize) -> Self {
        Self((0..2 * l).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect())
    }

    pub fn l(&self) -> usize {
        self.0.len() / 2
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[i8] {
        &self.0
    }

    /// b_i with cyclic indexing.
    pub fn step(&self, i: usize) -> i8 {
        self.0[i % self.0.len()]
    }

    /// Local maximum at pair (i, i+1).
    pub fn is_max(&self, i: usize) -> bool {
        self.step(i) == 1 && self.step(i + 1) == -1
    }

    /// Local minimum at pair (i, i+1).
    pub fn is_min(&self, i: usize) -> bool {
        self.step(i) == -1 && self.step(i + 1) == 1
    }

    pub fn k_b(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_max(i)).count()
    }

    /// Cyclic left rotation: new step i is old step i + k.
    pub fn rotate(&self, k: usize) -> Self {
        let n = self.len();
        Self((0..n).map(|i| self.0[(i + k) % n]).collect())
    }

    /// Bit i set iff b_i = +1. Injective for 2L ≤ 128.
    pub fn mask(&self) -> u128 {
        self.0.iter().enumerate().fold(0u128, |m, (i, s)| if *s == 1 { m | (1u128 << i) } else { m })
    }

    pub fn from_mask(mask: u128, len: usize) -> Result<Self> {
        Self::new((0..len).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    /// Text code such as "+-+-".
    pub fn code(&self) -> String {
        self.0.iter().map(|s| if *s == 1 { '+' } else { '-' }).collect()
    }

    pub(crate) fn flip_max(&mut self, i: usize) {
        let n = self.len();
        debug_assert!(self.is_max(i));
        self.0[i] = -1;
        self.0[(i + 1) % n] = 1;
    }
}

impl fmt::Display for Bridge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for Bridge {
    type Err = GlppError;

    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(GlppError::InvalidBridge(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Bridge::new(steps)
    }
}

impl Serialize for Bridge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.code())
    }
}

impl<'de> Deserialize<'de> for Bridge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The rule broken by a timed bridge, at 1-based pair `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("pair ({i},{j}) requires t{i} < t{j}")]
    Increasing { i: usize, j: usize },
    #[error("pair ({i},{j}) requires t{i} > t{j}")]
    Decreasing { i: usize, j: usize },
    #[error("pair ({i},{j}) is a minimum and requires t{i} = t{j}")]
    MinimumEquality { i: usize, j: usize },
    #[error("{ages} ages for a bridge of length {len}")]
    LengthMismatch { ages: usize, len: usize },
}

impl Violation {
    /// 0-based position of the offending pair.
    pub fn position(&self) -> Option<usize> {
        match *self {
            Violation::Increasing { i, .. } | Violation::Decreasing { i, .. } | Violation::MinimumEquality { i, .. } => {
                Some(i - 1)
            }
            Violation::LengthMismatch { .. } => None,
        }
    }
}

/// Checks every cyclic age constraint; on failure returns the first
/// violated pair.
pub fn validate_timed<T: PartialOrd>(b: &Bridge, t: &[T]) -> std::result::Result<(), Violation> {
    let n = b.len();
    if t.len() != n {
        return Err(Violation::LengthMismatch { ages: t.len(), len: n });
    }
    for i in 0..n {
        let k = (i + 1) % n;
        let (pi, pj) = pair_label(i, n);
        match (b.step(i), b.step(k)) {
            (1, 1) if !(t[i] < t[k]) => return Err(Violation::Increasing { i: pi, j: pj }),
            (-1, -1) if !(t[i] > t[k]) => return Err(Violation::Decreasing { i: pi, j: pj }),
            (-1, 1) if t[i] != t[k] => return Err(Violation::MinimumEquality { i: pi, j: pj }),
            _ => {}
        }
    }
    Ok(())
}

/// A bridge with one age per edge: integer steps in discrete time, reals in
/// continuous time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedBridge<T = u64> {
    bridge: Bridge,
    ages: Vec<T>,
}

impl<T: PartialOrd + Clone> TimedBridge<T> {
    pub fn new(bridge: Bridge, ages: Vec<T>) -> Result<Self> {
        validate_timed(&bridge, &ages).map_err(|v| GlppError::InvalidBridge(v.to_string()))?;
        Ok(Self { bridge, ages })
    }

    pub(crate) fn new_unchecked(bridge: Bridge, ages: Vec<T>) -> Self {
        debug_assert!(validate_timed(&bridge, &ages).is_ok(), "invalid timed bridge {}", bridge);
        Self { bridge, ages }
    }

    pub fn bridge(&self) -> &Bridge {
        &self.bridge
    }

    pub fn ages(&self) -> &[T] {
        &self.ages
    }

    pub fn into_parts(self) -> (Bridge, Vec<T>) {
        (self.bridge, self.ages)
    }
}

impl TimedBridge<u64> {
    /// Alternating bridge with all ages 0.
    pub fn initial(l: usize) -> Self {
        Self { bridge: Bridge::alternating(l), ages: vec![0; 2 * l] }
    }
}

impl<T: fmt::Display> TimedBridge<T> {
    /// Comma-separated ages.
    pub fn ages_csv(&self) -> String {
        self.ages.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl<T: fmt::Display> fmt::Display for TimedBridge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.bridge, self.ages_csv())
    }
}

#[derive(Serialize, Deserialize)]
struct TimedJson<T> {
    b: Bridge,
    t: Vec<T>,
}

impl<T: Serialize + Clone> Serialize for TimedBridge<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TimedJson { b: self.bridge.clone(), t: self.ages.clone() }.serialize(s)
    }
}

impl<'de, T: Deserialize<'de> + PartialOrd + Clone> Deserialize<'de> for TimedBridge<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TimedJson::<T>::deserialize(d)?;
        TimedBridge::new(j.b, j.t).map_err(serde::de::Error::custom)
    }
}

/// Parses "+-+- 1,2,3,4" style text (bridge code, whitespace, ages).
pub fn parse_timed(s: &str) -> Result<TimedBridge<u64>> {
    let (code, ages) = s
        .trim()
        .split_once(char::is_whitespace)
        .ok_or_else(|| GlppError::InvalidBridge("expected '<code> <ages>'".into()))?;
    let ages = ages
        .split(',')
        .map(|a| a.trim().parse::<u64>().map_err(|e| GlppError::InvalidBridge(format!("age {a:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    TimedBridge::new(code.parse()?, ages)
}

/// Maxima and minima of a bridge by 0-based left index, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremaIndex {
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
}

impl ExtremaIndex {
    pub fn k_b(&self) -> usize {
        self.maxima.len()
    }
}

pub fn local_extrema(b: &Bridge) -> ExtremaIndex {
    let n = b.len();
    ExtremaIndex {
        maxima: (0..n).filter(|&i| b.is_max(i)).collect(),
        minima: (0..n).filter(|&i| b.is_min(i)).collect(),
    }
}

/// All bridges of size 2L in lexicographic order with '+' before '-'.
pub fn enumerate_bridges(l: usize) -> Result<Vec<Bridge>> {
    enumerate_bridges_capped(l, DEFAULT_BRIDGE_CAP)
}

pub fn enumerate_bridges_capped(l: usize, cap: usize) -> Result<Vec<Bridge>> {
    if l == 0 || l > cap {
        return Err(GlppError::CapExceeded { l, cap });
    }
    fn rec(prefix: &mut Vec<i8>, ups: usize, downs: usize, out: &mut Vec<Bridge>) {
        if ups == 0 && downs == 0 {
            out.push(Bridge(prefix.clone()));
            return;
        }
        for (s, left) in [(1i8, ups), (-1i8, downs)] {
            if left > 0 {
                prefix.push(s);
                if s == 1 {
                    rec(prefix, ups - 1, downs, out);
                } else {
                    rec(prefix, ups, downs - 1, out);
                }
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(2 * l), l, l, &mut out);
    Ok(out)
}

/// Whether ages `a` then `c` on consecutive edges `(b_i, b_{i+1})` are allowed.
#[inline]
pub(crate) fn pair_allowed(bi: i8, bk: i8, a: u64, c: u64) -> bool {
    match (bi, bk) {
        (1, 1) => a < c,
        (-1, -1) => a > c,
        (-1, 1) => a == c,
        _ => true,
    }
}

/// Number of valid age vectors with entries ≤ t_cap for bridge `b`: a trace
/// of 0/1 transfer matrices.
pub fn count_timed(b: &Bridge, t_cap: u64) -> u128 {
    let m = t_cap as usize + 1;
    let n = b.len();
    let mut total = 0u128;
    for start in 0..m {
        let mut v = vec![0u128; m];
        v[start] = 1;
        for i in 0..n {
            let (bi, bk) = (b.step(i), b.step(i + 1));
            let mut w = vec![0u128; m];
            for (a, va) in v.iter().enumerate() {
                if *va == 0 {
                    continue;
                }
                for (c, wc) in w.iter_mut().enumerate() {
                    if pair_allowed(bi, bk, a as u64, c as u64) {
                        *wc += *va;
                    }
                }
            }
            v = w;
        }
        total += v[start];
    }
    total
}

/// Every timed bridge with all ages ≤ t_cap, bridges in canonical order and
/// ages lexicographic within a bridge.
pub fn enumerate_timed_truncated(l: usize, t_cap: u64) -> Result<Vec<TimedBridge>> {
    if l > 3 || t_cap > 60 {
        return Err(GlppError::StateSpaceTooLarge(format!("L = {l}, cap = {t_cap} (limits 3 and 60)")));
    }
    let bridges = enumerate_bridges(l)?;
    let count: u128 = bridges.iter().map(|b| count_timed(b, t_cap)).sum();
    if count > MAX_TIMED_STATES as u128 {
        return Err(GlppError::StateSpaceTooLarge(format!("{count} timed bridges at L = {l}, cap = {t_cap}")));
    }
    let mut out = Vec::with_capacity(count as usize);
    for b in bridges {
        let mut ages = vec![0u64; b.len()];
        fn rec(b: &Bridge, i: usize, ages: &mut Vec<u64>, t_cap: u64, out: &mut Vec<TimedBridge>) {
            let n = b.len();
            if i == n {
                if pair_allowed(b.step(n - 1), b.step(0), ages[n - 1], ages[0]) {
                    out.push(TimedBridge::new_unchecked(b.clone(), ages.clone()));
                }
                return;
            }
            for a in 0..=t_cap {
                if i == 0 || pair_allowed(b.step(i - 1), b.step(i), ages[i - 1], a) {
                    ages[i] = a;
                    rec(b, i + 1, ages, t_cap, out);
                }
            }
        }
        rec(&b, 0, &mut ages, t_cap, &mut out);
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binomial;

    fn b(s: &str) -> Bridge {
        s.parse().unwrap()
    }

    #[test]
    fn enumeration_counts_and_order() {
        let one = enumerate_bridges(1).unwrap();
        assert_eq!(one, vec![b("+-"), b("-+")]);
        for l in 1..=6 {
            assert_eq!(enumerate_bridges(l).unwrap().len() as f64, binomial(2 * l as u64, l as u64));
        }
        assert_eq!(enumerate_bridges(8).unwrap().len(), 12870);
        assert!(enumerate_bridges(4).unwrap().contains(&b("+-+--+-+")));
        assert!(matches!(enumerate_bridges(9), Err(GlppError::CapExceeded { l: 9, cap: 8 })));
        let two = enumerate_bridges(2).unwrap();
        assert!(two.windows(2).all(|w| w[0].code().replace('+', "0").replace('-', "1")
            < w[1].code().replace('+', "0").replace('-', "1")));
    }

    #[test]
    fn figure_state_is_valid() {
        let fb = b("+-+--+-+");
        assert_eq!(validate_timed(&fb, &[5u64, 0, 0, 4, 1, 1, 1, 1]), Ok(()));
        assert_eq!(validate_timed(&Bridge::alternating(4), &[0u64; 8]), Ok(()));
    }

    #[test]
    fn violation_witness() {
        let err = validate_timed(&b("++--"), &[0u64, 0, 1, 0]).unwrap_err();
        assert_eq!(err, Violation::Increasing { i: 1, j: 2 });
        assert_eq!(err.to_string(), "pair (1,2) requires t1 < t2");
        assert!(matches!(validate_timed(&b("+-"), &[1u64]), Err(Violation::LengthMismatch { .. })));
        assert!(matches!(validate_timed(&b("+-"), &[1u64, 2]), Err(Violation::MinimumEquality { i: 2, j: 1 })));
    }

    #[test]
    fn extrema_examples() {
        let e = local_extrema(&b("+-"));
        assert_eq!((e.maxima.clone(), e.minima.clone(), e.k_b()), (vec![0], vec![1], 1));
        assert_eq!(local_extrema(&Bridge::alternating(5)).k_b(), 5);
        let e = local_extrema(&b("++--"));
        assert_eq!(e.maxima.iter().map(|&i| pair_label(i, 4)).collect::<Vec<_>>(), vec![(2, 3)]);
        assert_eq!(e.minima.iter().map(|&i| pair_label(i, 4)).collect::<Vec<_>>(), vec![(4, 1)]);
        let fig = local_extrema(&b("+-+--+-+"));
        let labels: Vec<_> = fig.maxima.iter().map(|&i| pair_label(i, 8)).collect();
        // b₈ = b₁ = +1, so (8,1) is an increasing pair, not a maximum.
        assert_eq!(labels, vec![(1, 2), (3, 4), (6, 7)]);
        assert_eq!(fig.minima.len(), 3);
    }

    #[test]
    fn truncated_enumeration_examples() {
        assert_eq!(enumerate_timed_truncated(1, 2).unwrap().len(), 6);
        assert_eq!(enumerate_timed_truncated(1, 0).unwrap().len(), 2);
        let states = enumerate_timed_truncated(2, 1).unwrap();
        let mine: Vec<_> = states.iter().filter(|s| s.bridge() == &b("++--")).collect();
        assert_eq!(mine.len(), 1);
        assert_eq!(mine[0].ages(), &[0, 1, 1, 0]);
        // Exhaustive check of all 2^4 age grids.
        let brute = (0..16u32)
            .filter(|m| {
                let t: Vec<u64> = (0..4).map(|i| (m >> i & 1) as u64).collect();
                validate_timed(&b("++--"), &t).is_ok()
            })
            .count();
        assert_eq!(brute, 1);
        assert!(matches!(enumerate_timed_truncated(4, 2), Err(GlppError::StateSpaceTooLarge(_))));
        for s in enumerate_timed_truncated(2, 6).unwrap() {
            assert!(validate_timed(s.bridge(), s.ages()).is_ok());
        }
        assert_eq!(
            enumerate_timed_truncated(2, 9).unwrap().len() as u128,
            enumerate_bridges(2).unwrap().iter().map(|b| count_timed(b, 9)).sum::<u128>()
        );
    }

    #[test]
    fn rotation_moves_extrema() {
        let x = b("++-+--+-");
        let e = local_extrema(&x);
        for k in 0..x.len() {
            let r = local_extrema(&x.rotate(k));
            let shift = |v: &[usize]| {
                let mut w: Vec<usize> = v.iter().map(|&i| (i + x.len() - k) % x.len()).collect();
                w.sort();
                w
            };
            assert_eq!(r.maxima, shift(&e.maxima));
            assert_eq!(r.minima, shift(&e.minima));
        }
    }

    #[test]
    fn codecs_round_trip() {
        let t = parse_timed("+-+--+-+ 5,0,0,4,1,1,1,1").unwrap();
        assert_eq!(t.to_string(), "+-+--+-+ 5,0,0,4,1,1,1,1");
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"b":"+-+--+-+","t":[5,0,0,4,1,1,1,1]}"#);
        let back: TimedBridge = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<TimedBridge>(r#"{"b":"++--","t":[0,0,1,0]}"#).is_err());
        assert!("+-x".parse::<Bridge>().is_err());
        assert!("++".parse::<Bridge>().is_err());
        let m = b("+--+-+");
        assert_eq!(Bridge::from_mask(m.mask(), 6).unwrap(), m);
    }
}
