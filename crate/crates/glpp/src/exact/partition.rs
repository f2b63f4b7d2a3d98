use std::collections::BTreeMap;

use serde::Serialize;

use super::kernel::TransferKernel;
use super::weights::{ln_pair_sum, weight_w, WForm};
use crate::bridges::{enumerate_bridges, Bridge};
use crate::error::{GlppError, Result};
use crate::measures::MeasureFamily;
use crate::numeric::{compensated, CompensatedSum};

/// Largest cylinder handled by the exact contractions.
pub const MAX_EXACT_L: usize = 6;

/// Square matrices over ages 0..=T, one per pair type of the bridge.
struct PairKernels {
    dim: usize,
    inc: Vec<f64>,
    dec: Vec<f64>,
    max: Vec<f64>,
}

impl PairKernels {
    /// Reduced-form factors: √μ₀ of the increment and the max-pair sum.
    fn reduced(fam: &MeasureFamily, t_cap: u64) -> Self {
        let mu0 = fam.base();
        let dim = t_cap as usize + 1;
        let sq: Vec<f64> = (0..dim as u64).map(|d| if d == 0 { 0.0 } else { mu0.sqrt_pmf(d) }).collect();
        let mut inc = vec![0.0; dim * dim];
        let mut dec = vec![0.0; dim * dim];
        let mut max = vec![0.0; dim * dim];
        for a in 0..dim {
            for c in 0..dim {
                if c > a {
                    inc[a * dim + c] = sq[c - a];
                } else if a > c {
                    dec[a * dim + c] = sq[a - c];
                }
                max[a * dim + c] = if c >= a {
                    ln_pair_sum(mu0, a as u64, c as u64).exp()
                } else {
                    max[c * dim + a]
                };
            }
        }
        Self { dim, inc, dec, max }
    }

    /// Factors read off the kernels M±_α: increments along monotone pairs and
    /// a free vertex summed out at each maximum, times the survival factor.
    fn from_kernel(fam: &MeasureFamily, k: &TransferKernel, t_cap: u64) -> Self {
        let dim = t_cap as usize + 1;
        let mut inc = vec![0.0; dim * dim];
        let mut dec = vec![0.0; dim * dim];
        let mut max = vec![0.0; dim * dim];
        let n = 0i64;
        for a in 0..dim {
            for c in 0..dim {
                let (ea, ec) = (n - a as i64, n - c as i64);
                if c > a {
                    inc[a * dim + c] = k.m_plus(ea, ec);
                } else if a > c {
                    dec[a * dim + c] = k.m_minus(ea, ec);
                }
                let blue = fam.at(a.abs_diff(c) as u64).tail(a.min(c) as u64 + 1);
                max[a * dim + c] = k.plus_minus(ea, ec) * blue;
            }
        }
        Self { dim, inc, dec, max }
    }

    /// P ← P K for the pair (b_i, b_{i+1}); minima are the identity.
    fn apply(&self, p: &mut Vec<f64>, bi: i8, bk: i8) {
        let dim = self.dim;
        let k = match (bi, bk) {
            (-1, 1) => return,
            (1, 1) => &self.inc,
            (-1, -1) => &self.dec,
            _ => &self.max,
        };
        let mut out = vec![0.0; dim * dim];
        for r in 0..dim {
            let row = &p[r * dim..(r + 1) * dim];
            let dst = &mut out[r * dim..(r + 1) * dim];
            for (m, pv) in row.iter().enumerate() {
                if *pv == 0.0 {
                    continue;
                }
                let krow = &k[m * dim..(m + 1) * dim];
                for (d, kv) in dst.iter_mut().zip(krow) {
                    *d += pv * kv;
                }
            }
        }
        *p = out;
    }

    /// (Σ_t W, Σ_t t₁ W) over ages ≤ T for one bridge.
    fn contract(&self, b: &Bridge) -> (f64, f64) {
        let dim = self.dim;
        let mut p = vec![0.0; dim * dim];
        for i in 0..dim {
            p[i * dim + i] = 1.0;
        }
        for i in 0..b.len() {
            self.apply(&mut p, b.step(i), b.step(i + 1));
        }
        let tr = compensated((0..dim).map(|i| p[i * dim + i]));
        let t1 = compensated((0..dim).map(|i| i as f64 * p[i * dim + i]));
        (tr, t1)
    }
}

/// Remaining error of a sequence evaluated at caps T-2k, T-k, T, assuming
/// geometric convergence. An estimate, not a certified bound.
fn richardson(v: [f64; 3]) -> f64 {
    let (d0, d1) = (v[1] - v[0], v[2] - v[1]);
    let noise = 16.0 * f64::EPSILON * v[2].abs();
    if d1.abs() <= noise {
        return noise;
    }
    let rho = d1 / d0;
    if !(rho.abs() < 1.0) || !rho.is_finite() {
        return f64::INFINITY;
    }
    (d1 * rho / (1.0 - rho)).abs()
}

fn caps(t_cap: u64) -> [u64; 3] {
    let k = (t_cap / 8).max(1);
    [t_cap.saturating_sub(2 * k), t_cap.saturating_sub(k), t_cap]
}

fn check_l(l: usize) -> Result<()> {
    if l == 0 || l > MAX_EXACT_L {
        return Err(GlppError::CapExceeded { l, cap: MAX_EXACT_L });
    }
    Ok(())
}

struct Sweep {
    bridges: Vec<Bridge>,
    /// Per cap: per-bridge (Σ W, Σ t₁ W).
    sums: Vec<Vec<(f64, f64)>>,
}

fn sweep(l: usize, t_cap: u64, build: impl Fn(u64) -> PairKernels) -> Result<Sweep> {
    check_l(l)?;
    let bridges = enumerate_bridges(l)?;
    let sums = caps(t_cap)
        .iter()
        .map(|&c| {
            let k = build(c);
            bridges.iter().map(|b| k.contract(b)).collect()
        })
        .collect();
    Ok(Sweep { bridges, sums })
}

/// Z_L (reduced-form weights) summed over ages ≤ T, with a truncation
/// estimate. Fails when the estimate exceeds `tol` relative to Z_L.
pub fn partition_z(l: usize, fam: &MeasureFamily, t_cap: u64, tol: f64) -> Result<(f64, f64)> {
    let law = stationary_law(l, fam, t_cap, tol)?;
    Ok((law.z, law.z_bound))
}

/// One entry of an [`ExactLaw`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeProbability {
    pub p: f64,
    pub bound: f64,
}

/// Stationary front-line law of an integrable family.
#[derive(Debug, Clone, Serialize)]
pub struct ExactLaw {
    pub l: usize,
    pub family: String,
    pub t_cap: u64,
    pub z: f64,
    pub z_bound: f64,
    /// ν_L keyed by bridge code, canonical order.
    pub nu: BTreeMap<String, BridgeProbability>,
    #[serde(skip)]
    order: Vec<Bridge>,
    #[serde(skip)]
    fam: Option<MeasureFamily>,
}

impl ExactLaw {
    /// ν_L(b) for each bridge in canonical order.
    pub fn bridge_probabilities(&self) -> Vec<(Bridge, f64)> {
        self.order.iter().map(|b| (b.clone(), self.nu[&b.code()].p)).collect()
    }

    pub fn prob(&self, b: &Bridge) -> Option<f64> {
        self.nu.get(&b.code()).map(|e| e.p)
    }

    /// ν̃_L(b, t) = W_(b,t) / Z_L.
    pub fn nu_tilde(&self, b: &Bridge, t: &[u64]) -> Result<f64> {
        let fam = self.fam.as_ref().ok_or_else(|| GlppError::NotMaterialized("family".into()))?;
        Ok((weight_w(b, t, fam, WForm::Reduced)? - self.z.ln()).exp())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("law serializes")
    }
}

fn law_from_sweep(l: usize, label: String, t_cap: u64, tol: f64, sw: &Sweep, fam: Option<MeasureFamily>) -> Result<ExactLaw> {
    let zs: Vec<f64> = sw.sums.iter().map(|v| compensated(v.iter().map(|x| x.0))).collect();
    let z = zs[2];
    let z_bound = richardson([zs[0], zs[1], zs[2]]);
    if !(z_bound <= tol * z) {
        return Err(GlppError::TruncationNotConverged { bound: z_bound, tol });
    }
    let mut nu = BTreeMap::new();
    for (j, b) in sw.bridges.iter().enumerate() {
        let w = sw.sums[2][j].0;
        let wb = richardson([sw.sums[0][j].0, sw.sums[1][j].0, w]);
        nu.insert(b.code(), BridgeProbability { p: w / z, bound: (wb + w / z * z_bound) / z });
    }
    Ok(ExactLaw { l, family: label, t_cap, z, z_bound, nu, order: sw.bridges.clone(), fam })
}

/// ν_L over every bridge from reduced-form weights, by kernel contraction
/// along the cyclic bridge.
pub fn stationary_law(l: usize, fam: &MeasureFamily, t_cap: u64, tol: f64) -> Result<ExactLaw> {
    fam.base().sqrt_sum()?;
    let sw = sweep(l, t_cap, |c| PairKernels::reduced(fam, c))?;
    law_from_sweep(l, fam.label().to_string(), t_cap, tol, &sw, Some(fam.clone()))
}

/// The same law rebuilt from the α-deformed kernels M±_α with survival
/// factors at maxima. Its Z differs from the reduced one by the constant
/// (Σ√μ₀ α^v Σ√μ₀ α^{-v})^{-L}; ν_L must not depend on α.
pub fn stationary_law_alpha(l: usize, fam: &MeasureFamily, t_cap: u64, alpha: f64, tol: f64) -> Result<ExactLaw> {
    let kernel = TransferKernel::new(fam, t_cap.max(1) * 4, alpha)?;
    let sw = sweep(l, t_cap, |c| PairKernels::from_kernel(fam, &kernel, c))?;
    law_from_sweep(l, format!("{} alpha={alpha}", fam.label()), t_cap, tol, &sw, None)
}

/// Both exact speed routes with truncation estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedReport {
    pub l: usize,
    pub family: String,
    /// Σ W / Σ (2t₁ + 1) W.
    pub c_int_speed: f64,
    pub c_int_speed_bound: f64,
    /// Open-chain route over the kernel A(t, t') = Σ_s √(μ₀(t-s) μ₀(t'-s)).
    pub c_alt: f64,
    pub c_alt_bound: f64,
}

impl SpeedReport {
    pub fn routes_agree(&self, slack: f64) -> bool {
        (self.c_int_speed - self.c_alt).abs() <= self.c_int_speed_bound + self.c_alt_bound + slack
    }
}

pub fn speed_exact(l: usize, fam: &MeasureFamily, t_cap: u64) -> Result<SpeedReport> {
    fam.base().sqrt_sum()?;
    let sw = sweep(l, t_cap, |c| PairKernels::reduced(fam, c))?;
    let c: Vec<f64> = sw
        .sums
        .iter()
        .map(|v| {
            let z = compensated(v.iter().map(|x| x.0));
            let t1 = compensated(v.iter().map(|x| x.1));
            z / (2.0 * t1 + z)
        })
        .collect();
    let windows = caps(4 * t_cap);
    let alt: Vec<f64> = windows.iter().map(|w| speed_alt(l, fam, *w)).collect();
    Ok(SpeedReport {
        l,
        family: fam.label().to_string(),
        c_int_speed: c[2],
        c_int_speed_bound: richardson([c[0], c[1], c[2]]),
        c_alt: alt[2],
        c_alt_bound: richardson([alt[0], alt[1], alt[2]]),
    })
}

/// Σ F / Σ t₁ F over t₁, t_L ∈ [1, w], with the intermediate levels summed
/// over Z as the (L-1)-fold convolution of a(Δ) = Σ_v √(μ₀(v) μ₀(v+|Δ|)),
/// truncated to |Δ| ≤ w.
fn speed_alt(l: usize, fam: &MeasureFamily, w: u64) -> f64 {
    let mu0 = fam.base();
    let w = w as i64;
    let a: Vec<f64> = (0..=w).map(|d| ln_pair_sum(mu0, 0, d as u64).exp()).collect();
    let at = |d: i64| a[d.unsigned_abs() as usize];
    // conv[d + w] for d ∈ [-w, w].
    let mut conv = vec![0.0; (2 * w + 1) as usize];
    conv[w as usize] = 1.0;
    for _ in 1..l {
        let mut next = vec![0.0; conv.len()];
        for (i, nv) in next.iter_mut().enumerate() {
            let d = i as i64 - w;
            let mut acc = CompensatedSum::new();
            for (j, cv) in conv.iter().enumerate() {
                let e = j as i64 - w;
                if (d - e).abs() <= w && *cv != 0.0 {
                    acc.add(cv * at(d - e));
                }
            }
            *nv = acc.value();
        }
        conv = next;
    }
    let u: Vec<f64> = (0..=w).map(|t| if t == 0 { 0.0 } else { mu0.sqrt_pmf(t as u64) }).collect();
    let (mut num, mut den) = (CompensatedSum::new(), CompensatedSum::new());
    for t1 in 1..=w {
        for tl in 1..=w {
            let f = u[t1 as usize] * conv[(tl - t1 + w) as usize] * u[tl as usize];
            num.add(f);
            den.add(t1 as f64 * f);
        }
    }
    num.value() / den.value()
}
