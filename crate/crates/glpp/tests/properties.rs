//! Property tests for the structural invariants.

use glpp::bridges::{local_extrema, validate_timed, Bridge};
use glpp::chain::{successors, FrontChain};
use glpp::exact::{lemma_sumcomb, sumcomb_direct, weight_w, TransferKernel, WForm};
use glpp::growth::{grow_cylinder_with, phi_inv, phi_map};
use glpp::harness::CellUniforms;
use glpp::measures::{make_integrable_family, Law, MeasureFamily};
use glpp::oracle::tv_distance;
use glpp::pca::{front_line_kernel_weight, hzmm_bridge_weight, iterate_space_time_with, PcaTransition};
use proptest::prelude::*;

fn bridge(max_l: usize) -> impl Strategy<Value = Bridge> {
    (1..=max_l).prop_flat_map(|l| {
        let steps: Vec<i8> = std::iter::repeat(1).take(l).chain(std::iter::repeat(-1).take(l)).collect();
        Just(steps).prop_shuffle().prop_map(|s| Bridge::new(s).unwrap())
    })
}

fn law() -> impl Strategy<Value = Law> {
    prop_oneof![
        (0.2f64..0.8).prop_map(|p| Law::Geometric { p }),
        (0.5f64..3.0).prop_map(|lambda| Law::Poisson { lambda }),
        Just(Law::Zeta { s: 6.0 }),
    ]
}

/// A state reached by the coupled chain after `steps` steps.
fn chain_state(fam: &MeasureFamily, l: usize, seed: u64, steps: usize) -> glpp::bridges::TimedBridge {
    let cells = CellUniforms::new(seed);
    let mut ch = FrontChain::new(l);
    for _ in 0..steps {
        ch.step_coupled(fam, &cells);
    }
    ch.state()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_round_trip(x in -1000i64..1000, y in 0i64..1000) {
        let (cx, cy) = phi_map(x, y);
        prop_assert_eq!(phi_inv(cx, cy).unwrap(), (x, y));
        prop_assert!(phi_inv(cx + 1, cy).is_err());
    }

    #[test]
    fn rotation_is_equivariant(b in bridge(6), k in 0usize..12) {
        let n = b.len();
        let k = k % n;
        let e = local_extrema(&b);
        let r = local_extrema(&b.rotate(k));
        let shift = |v: &[usize]| { let mut s: Vec<usize> = v.iter().map(|i| (i + n - k) % n).collect(); s.sort(); s };
        prop_assert_eq!(shift(&e.maxima), r.maxima);
        prop_assert_eq!(shift(&e.minima), r.minima);
        prop_assert_eq!(e.maxima.len(), e.minima.len());
    }

    #[test]
    fn integrable_members_factor(law in law(), delta in 0u64..20, t in 1u64..30) {
        let fam = make_integrable_family(&law).unwrap();
        let mu0 = fam.base();
        let n = fam.normalizer(delta).unwrap();
        prop_assert!(n <= 1.0 + 1e-15);
        let lhs = fam.at(delta).pmf(t) * n;
        let rhs = (mu0.pmf(t) * mu0.pmf(t + delta)).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn chain_states_are_valid_and_rows_stochastic(law in law(), l in 1usize..4, seed in any::<u64>(), steps in 0usize..150) {
        let fam = make_integrable_family(&law).unwrap();
        let s = chain_state(&fam, l, seed, steps);
        prop_assert!(validate_timed(s.bridge(), s.ages()).is_ok());
        let succ = successors(&s, &fam).unwrap();
        prop_assert_eq!(succ.len(), 1 << s.bridge().k_b());
        let total: f64 = succ.iter().map(|x| x.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (next, _) in &succ {
            prop_assert!(validate_timed(next.bridge(), next.ages()).is_ok());
        }
    }

    #[test]
    fn weight_forms_cohere(law in law(), l in 1usize..5, seed in any::<u64>(), steps in 0usize..150) {
        let fam = make_integrable_family(&law).unwrap();
        let s = chain_state(&fam, l, seed, steps);
        let (b, t) = (s.bridge(), s.ages());
        let w1 = weight_w(b, t, &fam, WForm::Normalized).unwrap();
        let w2 = weight_w(b, t, &fam, WForm::Simple).unwrap();
        let w3 = weight_w(b, t, &fam, WForm::Reduced).unwrap();
        let ln_s = fam.base().sqrt_sum().unwrap().0.ln();
        prop_assert!((w2 - w3).abs() < 1e-12);
        prop_assert!((w1 - (w2 - 2.0 * l as f64 * ln_s)).abs() < 1e-12);
        let k = TransferKernel::new(&fam, fam.base().cap().max(500), 1.0).unwrap();
        let wk = front_line_kernel_weight(b, t, &fam, &k).unwrap();
        prop_assert!((wk - w1).abs() < 1e-12, "{} vs {}", wk, w1);
    }

    #[test]
    fn transition_rows_sum_to_one(law in law(), a in 0i64..40, b in 0i64..40) {
        let tr = PcaTransition::new(make_integrable_family(&law).unwrap());
        prop_assert!((tr.row_sum(a, b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stable_identity_is_translation_invariant(s in 0i64..10, t in 0i64..10, du in 1i64..15, v in 0i64..50) {
        let fam = make_integrable_family(&Law::Poisson { lambda: 1.0 }).unwrap();
        let k = TransferKernel::new(&fam, 200, 1.0).unwrap();
        let tr = PcaTransition::new(fam);
        let u = s.max(t) + du;
        let gap = |s: i64, t: i64, u: i64| k.minus_plus(s, t) * tr.t(s, t, u) - k.m_minus(s, u) * k.m_plus(u, t);
        prop_assert!((gap(s, t, u) - gap(s + v, t + v, u + v)).abs() < 1e-15);
    }

    #[test]
    fn alpha_leaves_weight_ratios_alone(b in bridge(4), seed in any::<u64>(), alpha in 0.5f64..2.0) {
        // Vertex values compatible with the steps: walk the zigzag with
        // random positive increments, then close it.
        let mut rng = seed;
        let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); 1 + (rng >> 60) as i64 };
        let n = b.len();
        let mut values = |shift: i64| {
            let mut v = vec![0i64; n];
            let mut lo = 0i64;
            for i in 1..n {
                v[i] = v[i - 1] - b.step(i - 1) as i64 * next();
                lo = lo.min(v[i]);
            }
            v.iter().map(|x| x - lo + shift).collect::<Vec<i64>>()
        };
        let (v1, v2) = (values(0), values(3));
        let fam = make_integrable_family(&Law::Poisson { lambda: 1.0 }).unwrap();
        let k1 = TransferKernel::new(&fam, 100, 1.0).unwrap();
        let ka = TransferKernel::new(&fam, 100, alpha).unwrap();
        let (a1, b1) = (hzmm_bridge_weight(&b, &v1, &k1), hzmm_bridge_weight(&b, &v2, &k1));
        let (aa, ba) = (hzmm_bridge_weight(&b, &v1, &ka), hzmm_bridge_weight(&b, &v2, &ka));
        if a1 > 0.0 && b1 > 0.0 {
            prop_assert!(((aa / ba) / (a1 / b1) - 1.0).abs() < 1e-10);
        } else {
            prop_assert_eq!(a1 == 0.0, aa == 0.0);
        }
    }

    #[test]
    fn sumcomb_closed_form(n in 0u64..60, k in 0u64..60) {
        prop_assume!(k <= n);
        prop_assert_eq!(lemma_sumcomb(n, k), sumcomb_direct(n, k));
    }

    #[test]
    fn arrival_times_increase_along_predecessors(l in 1usize..5, seed in any::<u64>()) {
        let fam = make_integrable_family(&Law::Geometric { p: 0.4 }).unwrap();
        let f = grow_cylinder_with(l, &fam, 60, &CellUniforms::new(seed)).unwrap();
        let m = 2 * l;
        for y in 1..f.rows() {
            for x in (y % 2..m).step_by(2) {
                let t = f.tau(x, y).unwrap();
                prop_assert!(t > f.tau((x + m - 1) % m, y - 1).unwrap());
                prop_assert!(t > f.tau((x + 1) % m, y - 1).unwrap());
            }
        }
    }

    #[test]
    fn growth_and_space_time_agree(l in 1usize..5, seed in any::<u64>()) {
        let fam = make_integrable_family(&Law::Poisson { lambda: 1.5 }).unwrap();
        let cells = CellUniforms::new(seed);
        let st = iterate_space_time_with(l, &fam, 20, &cells);
        let top = st.row(20).iter().copied().max().unwrap();
        let f = grow_cylinder_with(l, &fam, top, &cells).unwrap();
        for y in 0..=20usize {
            for cx in (y % 2..2 * l).step_by(2) {
                let (x, yy) = phi_inv(cx as i64, y as i64).unwrap();
                prop_assert_eq!(st.eta(x, yy as usize), f.tau(cx, y).unwrap());
            }
        }
    }

    #[test]
    fn tv_is_a_bounded_symmetric_distance(raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..20)) {
        let (sp, sq): (f64, f64) = raw.iter().fold((0.0, 0.0), |a, x| (a.0 + x.0, a.1 + x.1));
        prop_assume!(sp > 0.0 && sq > 0.0);
        let p: Vec<f64> = raw.iter().map(|x| x.0 / sp).collect();
        let q: Vec<f64> = raw.iter().map(|x| x.1 / sq).collect();
        let d = tv_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert_eq!(d, tv_distance(&q, &p).unwrap());
        prop_assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
    }
}
