//! Cross-module invariants that need a full truncated kernel.

use glpp::bridges::enumerate_bridges;
use glpp::chain::simulate_discrete;
use glpp::exact::stationary_law;
use glpp::measures::{make_integrable_family, Law};
use glpp::numeric::binomial;
use glpp::oracle::{power_iterate_stationary, truncated_transition_matrix, tv_distance_keyed, ClosurePolicy};

#[test]
fn bridge_counts_are_central_binomials() {
    for l in 1..=6 {
        assert_eq!(enumerate_bridges(l).unwrap().len() as f64, binomial(2 * l as u64, l as u64));
    }
}

#[test]
fn exact_law_is_a_fixed_point_of_the_kernel() {
    // With the overflow kept as a self-loop, (ν̃K - ν̃)_j = ν̃_j leak_j minus
    // the inflow from states beyond the cap, so the L1 gap is at most the
    // leaked mass plus the mass beyond the cap.
    let fam = make_integrable_family(&Law::Geometric { p: 0.5 }).unwrap();
    let m = truncated_transition_matrix(2, &fam, 30, ClosurePolicy::ReflectToCap).unwrap();
    let law = stationary_law(2, &fam, 80, 1e-12).unwrap();
    let nu: Vec<f64> = m.states().iter().map(|s| law.nu_tilde(s.bridge(), s.ages()).unwrap()).collect();
    let moved = m.left_multiply(&nu);
    let gap: f64 = nu.iter().zip(&moved).map(|(a, b)| (a - b).abs()).sum();
    let leaked: f64 = nu.iter().zip(m.row_leak()).map(|(a, l)| a * l).sum();
    let outside = 1.0 - nu.iter().sum::<f64>();
    assert!(gap <= leaked + outside + 1e-13, "gap {gap:e}, leaked {leaked:e}, beyond cap {outside:e}");
}

#[test]
fn closure_policies_agree_within_leak() {
    let fam = make_integrable_family(&Law::Poisson { lambda: 2.0 }).unwrap();
    let a = power_iterate_stationary(&truncated_transition_matrix(2, &fam, 30, ClosurePolicy::LeakRenormalize).unwrap(), 1e-13, 10_000).unwrap();
    let b = power_iterate_stationary(&truncated_transition_matrix(2, &fam, 30, ClosurePolicy::ReflectToCap).unwrap(), 1e-13, 10_000).unwrap();
    let leak = a.leaked_mass.max(b.leaked_mass);
    for (code, p) in &a.bridge_marginal {
        assert!((p - b.bridge_marginal[code]).abs() <= 10.0 * leak + 1e-12, "{code}");
    }
}

#[test]
fn oracle_matches_simulation() {
    let fam = make_integrable_family(&Law::Geometric { p: 0.5 }).unwrap();
    let st = power_iterate_stationary(&truncated_transition_matrix(2, &fam, 40, ClosurePolicy::LeakRenormalize).unwrap(), 1e-12, 10_000).unwrap();
    let traj = simulate_discrete(2, &fam, 1_000_000, 100_000, 11).unwrap();
    let tv = tv_distance_keyed(&traj.bridge_marginal(), &st.bridge_marginal).unwrap();
    // The marginal has six cells; 3 standard errors of the empirical TV at
    // 9e5 correlated draws stay well under 0.005.
    assert!(tv < 0.005, "{tv}");
}
