use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bridges::{enumerate_bridges, validate_timed, Bridge};
use crate::error::{GlppError, Result};
use crate::measures::{DensityFamily, DensityKind};
use crate::numeric::{compensated, integrate_interval, integrate_semi_infinite};

fn integrable(fam: &DensityFamily) -> Result<()> {
    if fam.kind() != DensityKind::Integrable {
        return Err(GlppError::InvalidMeasure(format!("{} is not an integrable family", fam.label())));
    }
    Ok(())
}

/// Unnormalized density of the stationary timed bridge: √f₀ of the
/// increment along monotone pairs, ∫ √f₀(s+t_i) √f₀(s+t_{i+1}) ds at maxima.
pub fn continuous_density_g(b: &Bridge, t: &[f64], fam: &DensityFamily) -> Result<f64> {
    integrable(fam)?;
    validate_timed(b, t).map_err(|v| GlppError::InvalidBridge(v.to_string()))?;
    Ok(density_unchecked(b, t, fam))
}

fn density_unchecked(b: &Bridge, t: &[f64], fam: &DensityFamily) -> f64 {
    let f0 = fam.base();
    let n = b.len();
    let mut g = 1.0;
    for i in 0..n {
        let k = (i + 1) % n;
        let (a, c) = (t[i], t[k]);
        g *= match (b.step(i), b.step(k)) {
            (1, -1) => {
                let d = (a - c).abs();
                fam.normalizer(d) * fam.tail(d, a.min(c))
            }
            (-1, 1) => 1.0,
            _ => f0.density((a - c).abs()).sqrt(),
        };
    }
    g
}

/// Free coordinates of a bridge: one per class of edges tied by a minimum,
/// with the strict orderings between classes.
struct Layout {
    /// Class of each edge.
    class: Vec<usize>,
    classes: usize,
    /// (lower, upper): t[lower] < t[upper].
    less: Vec<(usize, usize)>,
}

fn layout(b: &Bridge) -> Layout {
    let n = b.len();
    let mut class = vec![usize::MAX; n];
    let mut classes = 0;
    // A minimum at (i, i+1) ties edge i+1 to edge i.
    let start = (0..n).find(|&i| !b.is_min((i + n - 1) % n)).unwrap_or(0);
    for j in 0..n {
        let i = (start + j) % n;
        let prev = (i + n - 1) % n;
        if b.is_min(prev) && class[prev] != usize::MAX {
            class[i] = class[prev];
        } else {
            class[i] = classes;
            classes += 1;
        }
    }
    let mut less = Vec::new();
    for i in 0..n {
        let k = (i + 1) % n;
        match (b.step(i), b.step(k)) {
            (1, 1) => less.push((class[i], class[k])),
            (-1, -1) => less.push((class[k], class[i])),
            _ => {}
        }
    }
    // Relabel in topological order, so each coordinate is integrated after
    // the one below it and the nested integrands stay smooth.
    let mut rank = vec![usize::MAX; classes];
    for next in 0..classes {
        let c = (0..classes)
            .find(|&c| rank[c] == usize::MAX && less.iter().all(|&(a, u)| u != c || rank[a] != usize::MAX))
            .expect("orderings along a bridge are acyclic");
        rank[c] = next;
    }
    let class = class.into_iter().map(|c| rank[c]).collect();
    let less = less.into_iter().map(|(a, c)| (rank[a], rank[c])).collect();
    Layout { class, classes, less }
}

/// Nested adaptive quadrature of g over the free coordinates.
fn bridge_integral(b: &Bridge, fam: &DensityFamily, tol: f64) -> Result<(f64, f64)> {
    let lay = layout(b);
    let mut vals = vec![0.0; lay.classes];
    let err = std::cell::Cell::new(0.0f64);
    let v = nest(0, &lay, &mut vals, b, fam, tol, &err)?;
    Ok((v, err.get()))
}

fn nest(
    depth: usize,
    lay: &Layout,
    vals: &mut [f64],
    b: &Bridge,
    fam: &DensityFamily,
    tol: f64,
    err: &std::cell::Cell<f64>,
) -> Result<f64> {
    if depth == lay.classes {
        let t: Vec<f64> = lay.class.iter().map(|c| vals[*c]).collect();
        return Ok(density_unchecked(b, &t, fam));
    }
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for &(a, c) in &lay.less {
        if c == depth && a < depth {
            lo = lo.max(vals[a]);
        }
        if a == depth && c < depth {
            hi = hi.min(vals[c]);
        }
    }
    // Quadrature callbacks cannot return errors, so the first failure is
    // carried out through a cell.
    let failure = std::cell::RefCell::new(None);
    let inner = |x: f64| {
        let mut local = vals.to_vec();
        local[depth] = x;
        match nest(depth + 1, lay, &mut local, b, fam, tol, err) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let (v, e) = if hi.is_finite() { integrate_interval(inner, lo, hi, tol)? } else { integrate_semi_infinite(inner, lo, tol)? };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if depth == 0 {
        err.set(err.get() + e);
    }
    Ok(v)
}

/// Continuous stationary law: Z and the bridge marginal.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuousLaw {
    pub l: usize,
    pub family: String,
    pub z: f64,
    pub z_bound: f64,
    pub nu: BTreeMap<String, f64>,
    /// "quadrature" or "monte_carlo".
    pub method: String,
}

/// Z by nested quadrature over the free ages; L ≤ 2.
pub fn continuous_z(l: usize, fam: &DensityFamily) -> Result<ContinuousLaw> {
    integrable(fam)?;
    if l == 0 || l > 2 {
        return Err(GlppError::CapExceeded { l, cap: 2 });
    }
    let bridges = enumerate_bridges(l)?;
    let mut parts = Vec::new();
    for b in &bridges {
        parts.push(bridge_integral(b, fam, 1e-12)?);
    }
    let z = compensated(parts.iter().map(|p| p.0));
    let z_bound = parts.iter().map(|p| p.1).sum();
    let nu = bridges.iter().zip(&parts).map(|(b, p)| (b.code(), p.0 / z)).collect();
    Ok(ContinuousLaw { l, family: fam.label(), z, z_bound, nu, method: "quadrature".into() })
}

/// Z by importance sampling: free ages drawn i.i.d. exponential with the
/// mean of f₀. `z_bound` is one standard error.
pub fn continuous_z_monte_carlo(l: usize, fam: &DensityFamily, samples: usize, seed: u64) -> Result<ContinuousLaw> {
    integrable(fam)?;
    if samples < 2 {
        return Err(GlppError::InsufficientSamples(format!("{samples} samples")));
    }
    let bridges = enumerate_bridges(l)?;
    let mean = integrate_semi_infinite(|x| x * fam.base().density(x), 0.0, 1e-10)?.0;
    let rate = 1.0 / mean;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = Vec::with_capacity(bridges.len());
    for b in &bridges {
        let lay = layout(b);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let mut vals = vec![0.0; lay.classes];
            let mut ln_q = 0.0;
            for v in vals.iter_mut() {
                let u: f64 = rng.gen();
                *v = -(-u).ln_1p() / rate;
                ln_q += rate.ln() - rate * *v;
            }
            let ok = lay.less.iter().all(|&(a, c)| vals[a] < vals[c]);
            let w = if ok {
                let t: Vec<f64> = lay.class.iter().map(|c| vals[*c]).collect();
                density_unchecked(b, &t, fam) / ln_q.exp()
            } else {
                0.0
            };
            s1 += w;
            s2 += w * w;
        }
        let m = s1 / samples as f64;
        let var = (s2 / samples as f64 - m * m).max(0.0) / (samples as f64 - 1.0);
        est.push((m, var));
    }
    let z: f64 = est.iter().map(|e| e.0).sum();
    let z_bound = est.iter().map(|e| e.1).sum::<f64>().sqrt();
    let nu = bridges.iter().zip(&est).map(|(b, e)| (b.code(), e.0 / z)).collect();
    Ok(ContinuousLaw { l, family: fam.label(), z, z_bound, nu, method: "monte_carlo".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_integrable_density_family, DensityLaw};

    #[test]
    fn exponential_l1() {
        let lambda = 1.7;
        let fam = make_integrable_density_family(DensityLaw::Exponential { lambda }).unwrap();
        let law = continuous_z(1, &fam).unwrap();
        assert!((law.z - 2.0 / lambda).abs() < 1e-10, "{}", law.z);
        let b: Bridge = "+-".parse().unwrap();
        let g = continuous_density_g(&b, &[0.8, 0.8], &fam).unwrap();
        assert!((g - (-lambda * 0.8f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn exponential_l2_uniform() {
        let fam = make_integrable_density_family(DensityLaw::Exponential { lambda: 1.0 }).unwrap();
        let law = continuous_z(2, &fam).unwrap();
        for (code, p) in &law.nu {
            assert!((p - 1.0 / 6.0).abs() < 1e-9, "{code} {p}");
        }
    }

    #[test]
    fn scaling_keeps_the_marginal() {
        let a = continuous_z(2, &make_integrable_density_family(DensityLaw::HalfNormal { sigma: 1.0 }).unwrap()).unwrap();
        let b = continuous_z(2, &make_integrable_density_family(DensityLaw::HalfNormal { sigma: 3.0 }).unwrap()).unwrap();
        for (code, p) in &a.nu {
            assert!((p - b.nu[code]).abs() < 1e-8, "{code}");
        }
    }

    #[test]
    fn monte_carlo_l2_matches_quadrature() {
        let fam = make_integrable_density_family(DensityLaw::Exponential { lambda: 1.0 }).unwrap();
        let q = continuous_z(2, &fam).unwrap();
        let mc = continuous_z_monte_carlo(2, &fam, 200_000, 3).unwrap();
        assert!((mc.z - q.z).abs() < 5.0 * mc.z_bound, "{} vs {} ± {}", mc.z, q.z, mc.z_bound);
    }
}
