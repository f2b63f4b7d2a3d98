use crate::error::Result;
use crate::exact::TransferKernel;
use crate::measures::MeasureFamily;

use super::{PcaTransition, ResidualReport};

/// Grid for the invariance identity: s ≤ s_max, t ≤ t_max, max(s, t) < u ≤ u_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StableGrid {
    pub s_max: i64,
    pub t_max: i64,
    pub u_max: i64,
}

impl Default for StableGrid {
    fn default() -> Self {
        Self { s_max: 10, t_max: 10, u_max: 30 }
    }
}

/// Grid for the eight-factor identity: all four starting values ≤ st_max,
/// both targets ≤ u_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BelyaevGrid {
    pub st_max: i64,
    pub u_max: i64,
}

impl Default for BelyaevGrid {
    fn default() -> Self {
        Self { st_max: 6, u_max: 20 }
    }
}

/// Residual of (M⁻M⁺)(s; t) T(s, t; u) = M⁻(s; u) M⁺(u; t) with kernels
/// built from the base measure of `fam` and T from the family itself.
pub fn check_stable_identity(fam: &MeasureFamily, grid: StableGrid) -> Result<ResidualReport> {
    let kernel = TransferKernel::new(fam, fam.base().cap(), 1.0)?;
    let tr = PcaTransition::new(fam.clone());
    let mut rep = ResidualReport::new(
        "stable",
        fam.label(),
        &[("s_max", grid.s_max), ("t_max", grid.t_max), ("u_max", grid.u_max)],
    );
    for s in 0..=grid.s_max {
        for t in 0..=grid.t_max {
            let mp = kernel.minus_plus(s, t);
            for u in s.max(t) + 1..=grid.u_max {
                rep.record(mp * tr.t(s, t, u), kernel.m_minus(s, u) * kernel.m_plus(u, t), &[s, t, u]);
            }
        }
    }
    Ok(rep)
}

/// Residual of M⁻M⁺ = M⁺M⁻ on s, t ≤ max, the second product summed
/// explicitly over `terms` intermediate values.
pub fn check_commutation(fam: &MeasureFamily, max: i64, terms: u64) -> Result<ResidualReport> {
    let kernel = TransferKernel::new(fam, terms, 1.0)?;
    let mut rep = ResidualReport::new("commutation", fam.label(), &[("max", max), ("terms", terms as i64)]);
    rep.truncation_bound = kernel.tail_bound();
    for s in 0..=max {
        for t in 0..=max {
            rep.record(kernel.minus_plus(s, t), kernel.plus_minus(s, t), &[s, t]);
        }
    }
    Ok(rep)
}

/// Residual of T(s,t;u) T(s',t';u) T(s',t;u') T(s,t';u') =
/// T(s',t';u') T(s,t;u') T(s,t';u) T(s',t;u) over the grid. Works for any
/// family; only integrable ones satisfy it.
pub fn check_belyaev(fam: &MeasureFamily, grid: BelyaevGrid) -> ResidualReport {
    let tr = PcaTransition::new(fam.clone());
    let n = (grid.st_max + 1) as usize;
    let m = (grid.u_max + 1) as usize;
    let mut table = vec![0.0; n * n * m];
    for a in 0..n {
        for b in 0..n {
            for c in 0..m {
                table[(a * n + b) * m + c] = tr.t(a as i64, b as i64, c as i64);
            }
        }
    }
    let t = |a: usize, b: usize, c: usize| table[(a * n + b) * m + c];
    let mut rep = ResidualReport::new("belyaev", fam.label(), &[("st_max", grid.st_max), ("u_max", grid.u_max)]);
    for s in 0..n {
        for tt in 0..n {
            for s2 in 0..n {
                for t2 in 0..n {
                    for u in 1..m {
                        for u2 in 1..m {
                            let lhs = t(s, tt, u) * t(s2, t2, u) * t(s2, tt, u2) * t(s, t2, u2);
                            let rhs = t(s2, t2, u2) * t(s, tt, u2) * t(s, t2, u) * t(s2, tt, u);
                            rep.record(lhs, rhs, &[s, tt, s2, t2, u, u2].map(|v| v as i64));
                        }
                    }
                }
            }
        }
    }
    rep
}

/// The specialization s = t = 0, s' = t' = Δ, u = Δ+1, u' = Δ+v:
/// μ₀(Δ+1) μ₀(1) μ_Δ(v)² = μ₀(v) μ₀(Δ+v) μ_Δ(1)².
pub fn derive_cond_int(fam: &MeasureFamily, delta_max: u64, v_max: u64) -> ResidualReport {
    let mu0 = fam.base();
    let mut rep =
        ResidualReport::new("cond_int", fam.label(), &[("delta_max", delta_max as i64), ("v_max", v_max as i64)]);
    for d in 0..=delta_max {
        let md = fam.at(d);
        for v in 1..=v_max {
            let lhs = mu0.pmf(d + 1) * mu0.pmf(1) * md.pmf(v).powi(2);
            let rhs = mu0.pmf(v) * mu0.pmf(d + v) * md.pmf(1).powi(2);
            rep.record(lhs, rhs, &[d as i64, v as i64]);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_integrable_family, perturbed_family, DiscreteMeasure, Law};

    fn int(law: Law) -> MeasureFamily {
        make_integrable_family(&law).unwrap()
    }

    #[test]
    fn stable_hand_value() {
        let fam = int(Law::Geometric { p: 0.5 });
        let k = TransferKernel::new(&fam, 200, 1.0).unwrap();
        let c = 2f64.sqrt() + 1.0;
        let lhs = k.minus_plus(0, 0) * PcaTransition::new(fam.clone()).t(0, 0, 1);
        assert!((lhs - 0.5 / (c * c)).abs() < 1e-14, "{lhs}");
        assert!((lhs - 0.085_786_437_626_905).abs() < 1e-12);
    }

    #[test]
    fn stable_holds_for_integrable_families() {
        for law in [Law::Geometric { p: 0.5 }, Law::Poisson { lambda: 1.0 }, Law::Zeta { s: 6.0 }] {
            let rep = check_stable_identity(&int(law), StableGrid::default()).unwrap();
            assert!(rep.passed(1e-10), "{}", rep.to_json());
            assert!(rep.points > 100);
        }
    }

    #[test]
    fn kernels_commute() {
        let rep = check_commutation(&int(Law::Poisson { lambda: 2.0 }), 8, 400).unwrap();
        assert!(rep.max_residual <= 1e-12 + rep.truncation_bound, "{}", rep.to_json());
    }

    #[test]
    fn belyaev_discriminates() {
        let geo = int(Law::Geometric { p: 0.5 });
        assert!(check_belyaev(&geo, BelyaevGrid::default()).passed(1e-12));
        let pois = MeasureFamily::constant(DiscreteMeasure::from_law(&Law::Poisson { lambda: 1.0 }).unwrap());
        let rep = check_belyaev(&pois, BelyaevGrid::default());
        assert!(rep.max_residual > 1e-3 && rep.witness.is_some());
        let bad = perturbed_family(&geo, 1, 1, 1e-2, 30).unwrap();
        assert!(check_belyaev(&bad, BelyaevGrid::default()).max_residual >= 1e-3);
        assert!(check_stable_identity(&bad, StableGrid::default()).unwrap().max_residual >= 1e-3);
    }

    #[test]
    fn cond_int_specialization() {
        let geo = derive_cond_int(&int(Law::Geometric { p: 0.4 }), 3, 2);
        assert!(geo.max_residual < 1e-14);
        let z = derive_cond_int(&int(Law::Zeta { s: 6.0 }), 5, 10);
        assert!(z.max_residual <= 1e-11, "{}", z.max_residual);
    }
}
