//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Every built-in runs at 32³ and 64³; scenarios with fitted orders
//! also run at 16³.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use stlab::pipeline::{run_scenario, RunOptions};
use stlab::study::{fit_orders, OrderFit, StudyRun};
use stlab::{scenarios, ScenarioConfig};
use stlab_core::report::VerificationReport;

const FLAT_LHS_MAX: f64 = 1e-6;
const FLAT_RHS_MAX: f64 = 1e-4;
const FLAT_SECONDS_MAX: f64 = 60.0;
const TRACE_LHS_MAX: f64 = 1e-4;
const TRACE_RHS: f64 = -0.045;
const TRACE_RHS_REL: f64 = 0.05;
const QUASI_ERROR_MAX: f64 = 1e-3;
const QUASI_ORDER_MIN: f64 = 1.9;
const FLAT_IDENTITY_ORDER_MIN: f64 = 1.9;
const CURVED_IDENTITY_ORDER_MIN: f64 = 1.5;
const LEMMA_RESIDUAL_MAX: f64 = 1e-3;
const SPHERE_AREA_REL: f64 = 0.01;
const SPHERE_CURVATURE_REL: f64 = 0.02;
const COAREA_REL_MAX: f64 = 0.02;
const COAREA_FLOOR: f64 = 1e-6;
const N_LEVELS: usize = 64;

const IDENTITIES: [&str; 5] = ["bochner", "gauss_trace", "second_form_norm", "grad_norm_derivative", "mean_curvature"];
const FITTED: [&str; 3] = ["quasi-1d-exponential", "manufactured-sine", "conformal-faces"];

struct Scenario {
    cfg: ScenarioConfig,
    runs: BTreeMap<usize, StudyRun>,
    fits: Vec<OrderFit>,
    summaries: Vec<Vec<u8>>,
}

impl Scenario {
    fn report(&self, n: usize, name: &str) -> &VerificationReport {
        self.runs[&n].report(name).unwrap_or_else(|| panic!("{} has no {name} at {n}", self.cfg.name))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn coarea_relative(r: &VerificationReport) -> f64 {
    (r.lhs - r.rhs).abs() / r.lhs.abs().max(r.rhs.abs()).max(COAREA_FLOOR)
}

fn run_all(scratch: &Path) -> BTreeMap<String, Scenario> {
    let mut all = BTreeMap::new();
    for name in scenarios::names() {
        let mut cfg = scenarios::builtin(name).unwrap();
        cfg.verification.n_levels = N_LEVELS;
        let ladder: &[usize] = if FITTED.contains(&name) { &[16, 32, 64] } else { &[32, 64] };
        let mut runs = BTreeMap::new();
        let mut study_runs = Vec::new();
        for &n in ladder {
            let opts = RunOptions { out_dir: Some(scratch.join(name).join(format!("n{n}"))), write: true, ..Default::default() };
            let out = run_scenario(&cfg.with_resolution(n), &opts).unwrap_or_else(|e| panic!("{name} at {n}: {e}"));
            let spacing = out.analysis.grid().spacing().iter().copied().fold(0.0, f64::max);
            let run = StudyRun { resolution: n, spacing, reports: out.document.reports, manifest: out.manifest };
            study_runs.push(run.clone());
            runs.insert(n, run);
        }
        let fits = fit_orders(&study_runs);
        let rerun = scratch.join(name).join("rerun");
        let opts = RunOptions { out_dir: Some(rerun.clone()), write: true, ..Default::default() };
        run_scenario(&cfg.with_resolution(32), &opts).unwrap();
        let summaries = [scratch.join(name).join("n32"), rerun]
            .iter()
            .map(|d| std::fs::read(d.join("summary.csv")).unwrap())
            .collect();
        all.insert(name.to_string(), Scenario { cfg, runs, fits, summaries });
    }
    all
}

fn criterion_1() -> (bool, String) {
    let cfg = scenarios::builtin("flat-linear").unwrap();
    let out = run_scenario(&cfg, &RunOptions::default()).unwrap();
    let main = out.report("main_inequality").unwrap();
    let seconds = out.manifest.total_seconds();
    let ok = main.lhs.abs() <= FLAT_LHS_MAX && main.rhs.abs() <= FLAT_RHS_MAX && main.pass && seconds < FLAT_SECONDS_MAX;
    (ok, format!("flat-linear 32³: lhs {:.2e}, rhs {:.2e}, {seconds:.1} s", main.lhs, main.rhs))
}

fn criterion_2(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let main = all["trace-matched"].report(64, "main_inequality");
    let ok = main.lhs.abs() <= TRACE_LHS_MAX && rel(main.rhs, TRACE_RHS) <= TRACE_RHS_REL && main.pass;
    (ok, format!("trace-matched 64³: lhs {:.2e}, rhs {:.5}, margin {:.5}", main.lhs, main.rhs, main.margin))
}

fn criterion_3(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let s = &all["quasi-1d-exponential"];
    let error = s.report(64, "reference_solution").margin;
    let order = s.fits.iter().find(|f| f.check == "reference_solution").and_then(|f| f.order).unwrap_or(f64::NAN);
    let ok = error < QUASI_ERROR_MAX && order >= QUASI_ORDER_MIN;
    (ok, format!("quasi-1d max error {error:.2e} at 64³, order {order:.3}"))
}

fn criterion_4(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, min) in [("manufactured-sine", FLAT_IDENTITY_ORDER_MIN), ("conformal-faces", CURVED_IDENTITY_ORDER_MIN)] {
        for id in IDENTITIES {
            let fit = all[name].fits.iter().find(|f| f.check == id).expect("identity fitted");
            let (pass, shown) = match (fit.exact, fit.order) {
                (true, _) => (true, "exact".to_string()),
                (false, Some(p)) => (p >= min, format!("{p:.2}")),
                (false, None) => (false, "n/a".to_string()),
            };
            ok &= pass;
            parts.push(format!("{}:{id}={shown}", &name[..4]));
        }
    }
    (ok, parts.join(" "))
}

fn criterion_5(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let trace = &all["trace-matched"];
    let dirichlet = ["dirichlet_lemma_x_lo", "dirichlet_lemma_x_hi"]
        .iter()
        .map(|n| trace.report(64, n).margin.abs())
        .fold(0.0, f64::max);
    let conformal = &all["conformal-faces"];
    let neumann = conformal.report(64, "neumann_gradient_lemma_z_hi");
    let plus = neumann.breakdown_value("residual_plus").unwrap();
    let minus = neumann.breakdown_value("residual_minus").unwrap();
    let sign = neumann.breakdown_value("matching_sign").unwrap();
    let unique = (plus < LEMMA_RESIDUAL_MAX) != (minus < LEMMA_RESIDUAL_MAX);
    let split = conformal.report(64, "neumann_curvature_split_z_hi").margin.abs();
    let ok = dirichlet < LEMMA_RESIDUAL_MAX && unique && plus.min(minus) < LEMMA_RESIDUAL_MAX && split < LEMMA_RESIDUAL_MAX;
    (
        ok,
        format!("dirichlet {dirichlet:.2e}; neumann sign {sign:+} (±: {plus:.2e}/{minus:.2e}); curvature split {split:.2e}"),
    )
}

fn criterion_6(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let s = &all["radial-spheres"];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, tol) in [
        ("sphere_area", SPHERE_AREA_REL),
        ("sphere_mean_curvature", SPHERE_CURVATURE_REL),
        ("sphere_gauss_curvature", SPHERE_CURVATURE_REL),
        ("sphere_gauss_bonnet", SPHERE_CURVATURE_REL),
    ] {
        // Curvature margins are the worst triangle's relative error.
        let e = s.report(64, name).margin;
        ok &= e <= tol;
        parts.push(format!("{name} {e:.2e}"));
    }
    (ok, parts.join(", "))
}

fn criterion_7(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in all {
        let coarse = coarea_relative(s.report(32, "coarea_consistency"));
        let fine = coarea_relative(s.report(64, "coarea_consistency"));
        let below_floor = (s.report(64, "coarea_consistency").lhs - s.report(64, "coarea_consistency").rhs).abs() <= COAREA_FLOOR;
        let pass = fine <= COAREA_REL_MAX && (fine < coarse || below_floor);
        ok &= pass;
        parts.push(format!("{name} {coarse:.1e}->{fine:.1e}"));
    }
    (ok, parts.join(", "))
}

fn criterion_8(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let mut ok = true;
    let mut covered = Vec::new();
    for (name, s) in all {
        if !s.cfg.u_solves() {
            continue;
        }
        let holds = |c: &str| s.report(64, c).pass;
        if holds("condition_bulk_worst_case") && holds("condition_boundary_convexity") {
            let main = s.report(64, "main_inequality");
            ok &= main.pass;
            covered.push(format!("{name} margin {:.1e}", main.margin));
        }
    }
    ok &= !covered.is_empty();
    (ok, format!("conditions hold on: {}", covered.join(", ")))
}

fn criterion_9(all: &BTreeMap<String, Scenario>) -> (bool, String) {
    let differing: Vec<&str> =
        all.iter().filter(|(_, s)| s.summaries[0] != s.summaries[1]).map(|(n, _)| n.as_str()).collect();
    (differing.is_empty(), format!("{} scenarios rerun at 32³, differing: {differing:?}", all.len()))
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().unwrap();
    let c1 = criterion_1();
    let all = run_all(scratch.path());
    let results = [
        c1,
        criterion_2(&all),
        criterion_3(&all),
        criterion_4(&all),
        criterion_5(&all),
        criterion_6(&all),
        criterion_7(&all),
        criterion_8(&all),
        criterion_9(&all),
    ];
    let mut failed = 0;
    for (k, (ok, detail)) in results.iter().enumerate() {
        println!("criterion {}: {} | {detail}", k + 1, if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
