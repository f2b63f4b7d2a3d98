use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use glpp::acceptance::{run_criterion, CriterionResult, CRITERIA};
use glpp::chain::{simulate_continuous, simulate_discrete_with, ContinuousConfig, SimConfig, Trajectory};
use glpp::exact::{continuous_z, continuous_z_monte_carlo, speed_exact, stationary_law};
use glpp::growth::{grow_quarter_plane, shape_profile, ShapeReference};
use glpp::measures::{parse_family, AnyFamily, FamilyKind, FamilySpec, Law};
use glpp::pca::{check_belyaev, check_stable_identity, BelyaevGrid, StableGrid};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{ExactArgs, Failure, PcaCheckArgs, QuarterArgs, SimulateArgs, VerifyArgs};

type Outcome = Result<ExitCode, Failure>;

fn family(s: &str) -> Result<(FamilySpec, AnyFamily), Failure> {
    let spec = parse_family(s)?;
    let built = spec.build()?;
    Ok((spec, built))
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        // A closed pipe (`| head`) is not an error worth reporting.
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    Ok(())
}

fn csv_list<const N: usize>(s: &str, what: &str) -> Result<[i64; N], Failure> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("{what}: expected {N} comma-separated integers, got {s:?}")))?;
    parts
        .try_into()
        .map_err(|_| Failure::Config(format!("{what}: expected {N} comma-separated integers, got {s:?}")))
}

pub fn simulate(a: SimulateArgs) -> Outcome {
    let (spec, built) = family(&a.family)?;
    let seed = a.common.seed;
    let provenance = json!({ "seed": seed, "family": spec, "L": a.l });
    if a.continuous || matches!(built, AnyFamily::Density(_)) {
        let fam = built.density()?;
        let mut cfg = ContinuousConfig::new(a.horizon, seed);
        cfg.force = a.force;
        let run = simulate_continuous(a.l, &fam, &cfg)?;
        for w in &run.warnings {
            eprintln!("glpp: warning: {w}");
        }
        let value = json!({
            "command": "simulate",
            "provenance": provenance,
            "horizon": a.horizon,
            "burn_in": cfg.burn_in,
            "speed": run.speed(),
            "run": run,
        });
        emit(&value, a.common.out.as_deref())?;
        return Ok(ExitCode::SUCCESS);
    }
    let fam = built.discrete()?;
    if a.replicas == 0 {
        return Err(Failure::Config("--replicas must be at least 1".into()));
    }
    let burn_in = a.burn_in.unwrap_or(a.steps / 10);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Failure::Other(e.to_string()))?;
    // Replica r uses seed + r; results come back in replica order.
    let runs: Vec<Result<Trajectory, glpp::GlppError>> = pool.install(|| {
        (0..a.replicas)
            .into_par_iter()
            .map(|r| {
                let cfg = SimConfig {
                    steps: a.steps,
                    burn_in,
                    seed: seed.wrapping_add(r),
                    record: r == 0 && a.trajectory.is_some(),
                };
                simulate_discrete_with(a.l, &fam, &cfg)
            })
            .collect()
    });
    let mut runs = runs.into_iter();
    let mut total = runs.next().expect("at least one replica")?;
    if let (Some(path), Some(csv)) = (&a.trajectory, total.to_csv()) {
        fs::write(path, csv)?;
    }
    for r in runs {
        total.merge(&r?);
    }
    let value = json!({
        "command": "simulate",
        "provenance": { "seed": seed, "family": spec, "L": a.l, "replicas": a.replicas },
        "summary": total.summary()?,
    });
    emit(&value, a.common.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

pub fn exact(a: ExactArgs) -> Outcome {
    let (spec, built) = family(&a.mu0)?;
    let seed = a.common.seed;
    if a.continuous || matches!(built, AnyFamily::Density(_)) {
        let fam = built.density()?;
        let law = if a.l <= 2 { continuous_z(a.l, &fam)? } else { continuous_z_monte_carlo(a.l, &fam, a.samples, seed)? };
        let value = json!({
            "command": "exact",
            "provenance": { "seed": seed, "family": spec, "L": a.l, "samples": a.samples },
            "law": law,
        });
        emit(&value, a.common.out.as_deref())?;
        return Ok(ExitCode::SUCCESS);
    }
    let fam = built.discrete()?;
    if fam.kind() != FamilyKind::Integrable {
        return Err(Failure::Config(format!("{} is not an integrable family", fam.label())));
    }
    let law = stationary_law(a.l, &fam, a.cap, a.tol)?;
    let mut value = json!({
        "command": "exact",
        "provenance": { "family": spec, "L": a.l, "cap": a.cap, "tol": a.tol },
        "law": law.to_json(),
    });
    if a.speed {
        value["speed"] = serde_json::to_value(speed_exact(a.l, &fam, a.cap)?).expect("speed serializes");
    }
    emit(&value, a.common.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

pub fn pca_check(a: PcaCheckArgs) -> Outcome {
    let (spec, built) = family(&a.mu0)?;
    let fam = built.discrete()?;
    let [s_max, t_max, u_max] = csv_list::<3>(&a.grid, "--grid")?;
    let [st_max, bu_max] = csv_list::<2>(&a.belyaev_grid, "--belyaev-grid")?;
    let stable = check_stable_identity(&fam, StableGrid { s_max, t_max, u_max })?;
    let belyaev = check_belyaev(&fam, BelyaevGrid { st_max, u_max: bu_max });
    let passed = stable.passed(a.tol) && belyaev.passed(a.tol);
    let value = json!({
        "command": "pca-check",
        "provenance": { "family": spec, "grid": [s_max, t_max, u_max], "belyaev_grid": [st_max, bu_max], "tol": a.tol },
        "passed": passed,
        "stable": stable,
        "belyaev": belyaev,
    });
    emit(&value, a.out.as_deref())?;
    if !passed {
        return Err(Failure::Certificate(format!(
            "residuals {:e} and {:e} exceed {:e}",
            stable.max_residual, belyaev.max_residual, a.tol
        )));
    }
    Ok(ExitCode::SUCCESS)
}

/// Known limit shape: classical geometric weights, which integrable
/// geometric families also are (every μ_Δ is the same geometric law).
fn reference(spec: &FamilySpec, kind: FamilyKind) -> Option<ShapeReference> {
    if kind == FamilyKind::EdgeLpp {
        return None;
    }
    match spec.base_law().ok()? {
        (Law::Geometric { p }, _) => Some(ShapeReference::Geometric { p }),
        _ => None,
    }
}

pub fn quarterplane(a: QuarterArgs) -> Outcome {
    let (spec, built) = family(&a.family)?;
    let fam = built.discrete()?;
    let seed = a.common.seed;
    let field = grow_quarter_plane(a.n, &fam, a.until, seed)?;
    let profile = shape_profile(&field, a.until, reference(&spec, fam.kind()));
    if let Some(p) = &a.svg {
        fs::write(p, profile.to_svg())?;
    }
    if let Some(p) = &a.csv {
        fs::write(p, profile.to_csv())?;
    }
    let diag = (1..a.n).rev().find(|&k| field.tau(k, k) <= a.until).unwrap_or(0);
    let value = json!({
        "command": "quarterplane",
        "provenance": { "seed": seed, "family": spec, "N": a.n, "until": a.until },
        "diagonal_reached": diag,
        "profile": profile,
    });
    emit(&value, a.common.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: VerifyArgs) -> Outcome {
    if a.suite != "desk" {
        return Err(Failure::Config(format!("unknown suite {:?}; available: desk", a.suite)));
    }
    let ids: Vec<u8> = if a.only.is_empty() { (1..=CRITERIA).collect() } else { a.only.clone() };
    if let Some(bad) = ids.iter().find(|i| !(1..=CRITERIA).contains(*i)) {
        return Err(Failure::Config(format!("no criterion {bad}")));
    }
    let mut results: Vec<CriterionResult> = Vec::new();
    for id in ids {
        let r = run_criterion(id);
        println!("{r}");
        for d in &r.details {
            println!("      {d}");
        }
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if let Some(p) = &a.json {
        emit(&json!({ "suite": a.suite, "results": results }), Some(p))?;
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
