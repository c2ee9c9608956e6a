//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! The extended table rows are slow and run only with `STEERKIT_SLOW=1`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use steerkit::feasibility::solver::ClarabelSolver;
use steerkit::feasibility::{
    assemble_assemblage_program, assemble_program, enumerate_strategies, extract_inequality, lhs_bound, max_alpha,
    quantum_value, solve_feasibility, FeasibilityStatus, SteeringInequality,
};
use steerkit::lhs::{
    analytic_expectations, binomial_standard_error, monte_carlo_pairs, quadrature_expectations, Expectations,
    ModelParameters,
};
use steerkit::optimizer::{table_one_campaign, CampaignConfig, CampaignTable};
use steerkit::pauli::expectation;
use steerkit::rng::{stream_rng, uniform_direction};
use steerkit::state::{
    assemblage_from_measurements, correlation_table, entanglement_threshold, make_state, no_signaling_check,
};
use steerkit::{BlochVector, MeasurementSet, Party, QubitOperator};

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Line {
    id: &'static str,
    verdict: Verdict,
    detail: String,
    elapsed: Duration,
}

struct Suite {
    lines: Vec<Line>,
    /// Largest no-signaling residual over every assemblage built by the suite.
    signaling: f64,
    campaign: Option<CampaignTable>,
}

impl Suite {
    fn record(&mut self, id: &'static str, pass: bool, detail: String, elapsed: Duration) {
        let verdict = if pass { Verdict::Pass } else { Verdict::Fail };
        self.push(Line { id, verdict, detail, elapsed });
    }

    fn push(&mut self, line: Line) {
        let tag = match line.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        };
        println!("{tag} {} [{:.1}s] {}", line.id, line.elapsed.as_secs_f64(), line.detail);
        self.lines.push(line);
    }

    fn optimized_set(&self, m: usize) -> Option<MeasurementSet> {
        let row = self.campaign.as_ref()?.rows.iter().find(|r| r.m == m)?;
        MeasurementSet::normalized(row.directions.clone()).ok()
    }
}

fn solver() -> ClarabelSolver {
    ClarabelSolver::default()
}

fn trace_values(alpha: f64, x: &BlochVector, y: &BlochVector) -> Expectations {
    let state = make_state(alpha).unwrap();
    let (ox, oy, id) = (QubitOperator::observable(x), QubitOperator::observable(y), QubitOperator::identity());
    Expectations {
        ea: expectation(state.operator(), &ox, &id),
        eb: expectation(state.operator(), &id, &oy),
        eab: expectation(state.operator(), &ox, &oy),
    }
}

fn random_pairs(seed: u64, k: usize) -> Vec<(BlochVector, BlochVector)> {
    let mut rng = stream_rng(seed, 0);
    (0..k).map(|_| (uniform_direction(&mut rng), uniform_direction(&mut rng))).collect()
}

fn ac1(suite: &mut Suite) {
    let t = Instant::now();
    let found = entanglement_threshold().unwrap();
    let elapsed = t.elapsed();
    let exact = (-6.0 + 5.0 * 6f64.sqrt()) / 19.0;
    let err = (found - exact).abs();
    suite.record(
        "AC1 entanglement threshold",
        err <= 1e-5 && elapsed < Duration::from_secs(1),
        format!("bisection {found:.8}, (-6+5*sqrt6)/19 = {exact:.8}, |diff| {err:.1e} (tol 1e-5, < 1 s)"),
        elapsed,
    );
}

fn ac2(suite: &mut Suite) {
    let t = Instant::now();
    let params = ModelParameters::default();
    let (mut trace_dev, mut quad_dev) = (0.0f64, 0.0f64);
    for (x, y) in random_pairs(2, 100) {
        let a = analytic_expectations(&x, &y, &params);
        trace_dev = trace_dev.max(a.max_abs_diff(&trace_values(0.5, &x, &y)));
        quad_dev = quad_dev.max(a.max_abs_diff(&quadrature_expectations(&x, &y, &params).unwrap()));
    }
    let elapsed = t.elapsed();
    suite.record(
        "AC2 LHS model exactness",
        trace_dev <= 1e-10 && quad_dev <= 1e-7 && elapsed < Duration::from_secs(30),
        format!("100 pairs: analytic vs trace {trace_dev:.1e} (tol 1e-10), quadrature vs analytic {quad_dev:.1e} (tol 1e-7)"),
        elapsed,
    );
}

fn ac3(suite: &mut Suite) {
    let t = Instant::now();
    let params = ModelParameters::default();
    let pairs = random_pairs(3, 10);
    let n = 10_000_000;
    let report = monte_carlo_pairs(&pairs, n, 2024, &params).unwrap();
    let (mut worst_z, mut worst_abs) = (0.0f64, 0.0f64);
    for p in &report.pairs {
        let a = analytic_expectations(&p.x, &p.y, &params);
        for (mean, exp) in [(p.mean.ea, a.ea), (p.mean.eb, a.eb), (p.mean.eab, a.eab)] {
            worst_abs = worst_abs.max((mean - exp).abs());
            worst_z = worst_z.max((mean - exp).abs() / binomial_standard_error(exp, n));
        }
    }
    let elapsed = t.elapsed();
    suite.record(
        "AC3 Monte Carlo protocol",
        worst_z <= 5.0 && worst_abs <= 0.002 && elapsed < Duration::from_secs(120),
        format!("10 pairs x 1e7 rounds: max {worst_z:.2} SE (tol 5), max |dev| {worst_abs:.1e} (tol 2e-3)"),
        elapsed,
    );
}

fn row_checks(table: &CampaignTable, targets: &[(usize, f64, f64)]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(m, target, tol) in targets {
        match table.rows.iter().find(|r| r.m == m) {
            Some(r) => {
                let d = r.alpha_star - target;
                ok &= d.abs() <= tol;
                parts.push(format!("m={m} {:.5} (reference {target}, delta {d:+.5}, tol {tol})", r.alpha_star));
            }
            None => {
                ok = false;
                parts.push(format!("m={m} missing"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn reproducible(table: &CampaignTable) -> (bool, f64) {
    let threshold = entanglement_threshold().unwrap();
    let mut ok = true;
    let mut prev = 1.0;
    let mut worst = 0.0f64;
    for r in &table.rows {
        let set = MeasurementSet::normalized(r.directions.clone()).unwrap();
        let again = max_alpha(&set, &solver()).unwrap().alpha_star;
        worst = worst.max((again - r.alpha_star).abs());
        ok &= r.alpha_star <= prev + 1e-6 && r.alpha_star > threshold;
        prev = r.alpha_star;
    }
    (ok && worst <= 1e-6, worst)
}

fn ac4(suite: &mut Suite) {
    let t = Instant::now();
    let result = table_one_campaign(&CampaignConfig::new(6, 1), &solver());
    let elapsed = t.elapsed();
    match result {
        Ok((table, _)) => {
            let (rows_ok, detail) = row_checks(
                &table,
                &[(2, 0.6951, 1e-3), (3, 0.5661, 1e-3), (4, 0.5424, 1e-3), (5, 0.5302, 2e-3), (6, 0.5156, 2e-3)],
            );
            let (repro_ok, worst) = reproducible(&table);
            suite.record(
                "AC4 threshold table, m = 2..6",
                rows_ok && repro_ok && elapsed <= Duration::from_secs(1800),
                format!("{detail}; re-evaluation {worst:.1e}, non-increasing above PPT threshold: {repro_ok}"),
                elapsed,
            );
            suite.campaign = Some(table);
        }
        Err(e) => suite.record("AC4 threshold table, m = 2..6", false, format!("campaign failed: {e}"), elapsed),
    }
}

fn ac5(suite: &mut Suite) {
    let id = "AC5 threshold table, m = 7..14";
    if std::env::var("STEERKIT_SLOW").as_deref() != Ok("1") {
        suite.push(Line { id, verdict: Verdict::Skip, detail: "set STEERKIT_SLOW=1 to run".into(), elapsed: Duration::ZERO });
        return;
    }
    let Some(base) = suite.campaign.clone() else {
        suite.record(id, false, "needs the m = 2..6 rows".into(), Duration::ZERO);
        return;
    };
    let t = Instant::now();
    let restarts: usize = std::env::var("STEERKIT_SLOW_RESTARTS").ok().and_then(|v| v.parse().ok()).unwrap_or(4);
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("campaign.json");
    std::fs::write(&ckpt, serde_json::to_vec(&base).unwrap()).unwrap();
    let mut cfg = CampaignConfig::new(10, 1);
    cfg.search.restarts = restarts;
    cfg.checkpoint = Some(ckpt.clone());
    let gated = table_one_campaign(&cfg, &solver());
    let (ok, detail) = match &gated {
        Ok((table, _)) => row_checks(table, &[(8, 0.5088, 2e-3), (10, 0.5030, 2e-3)]),
        Err(e) => (false, format!("campaign failed: {e}")),
    };
    // m = 13, 14 are attempted with a small budget and reported only
    let mut cfg = CampaignConfig::new(14, 1);
    cfg.search.restarts = 1;
    cfg.search.max_evaluations = Some(
        std::env::var("STEERKIT_SLOW_EVALUATIONS").ok().and_then(|v| v.parse().ok()).unwrap_or(150),
    );
    cfg.checkpoint = Some(ckpt);
    let reported = match table_one_campaign(&cfg, &solver()) {
        Ok((table, _)) => table
            .rows
            .iter()
            .filter(|r| r.m >= 11)
            .map(|r| format!("m={} {:.5} (reference {:.4})", r.m, r.alpha_star, r.paper_alpha_star.unwrap_or(f64::NAN)))
            .collect::<Vec<_>>()
            .join("; "),
        Err(e) => format!("extension failed: {e}"),
    };
    suite.record(id, ok, format!("{detail}; reported only: {reported}"), t.elapsed());
}

fn ac6(suite: &mut Suite) {
    let id = "AC6 one-way steering";
    let Some(m6) = suite.optimized_set(6) else {
        suite.record(id, false, "needs the optimized m = 6 set".into(), Duration::ZERO);
        return;
    };
    let t = Instant::now();
    let s = solver();
    let state = make_state(0.52).unwrap();
    suite.signaling = suite.signaling.max(no_signaling_check(&assemblage_from_measurements(&state, &m6, Party::A)));
    let table = correlation_table(&state, &m6);
    let forward = solve_feasibility(&assemble_program(&table, enumerate_strategies(6).unwrap()).unwrap(), &s).unwrap();
    let steerable = forward.status == FeasibilityStatus::Infeasible;

    let half = make_state(0.5).unwrap();
    let mut rng = stream_rng(6, 0);
    let mut local = 0;
    let mut worst_shortfall = f64::NEG_INFINITY;
    for _ in 0..50 {
        let m = rng.random_range(1..=6);
        let bob = MeasurementSet::new((0..m).map(|_| uniform_direction(&mut rng)).collect()).unwrap();
        let asm = assemblage_from_measurements(&half, &bob, Party::B);
        suite.signaling = suite.signaling.max(no_signaling_check(&asm));
        let p = assemble_assemblage_program(&asm, enumerate_strategies(m).unwrap()).unwrap();
        let r = solve_feasibility(&p, &s).unwrap();
        worst_shortfall = worst_shortfall.max(r.residuals.shortfall);
        local += usize::from(r.status == FeasibilityStatus::Feasible);
    }
    let elapsed = t.elapsed();
    suite.record(
        id,
        steerable && local == 50 && elapsed < Duration::from_secs(1200),
        format!(
            "A->B at alpha=0.52 with optimized m=6: {:?} (theta* {:.5}); B->A at alpha=0.5: {local}/50 feasible (worst shortfall {worst_shortfall:.1e})",
            forward.status, forward.theta_star
        ),
        elapsed,
    );
}

/// Brute force over strategies and a Fibonacci grid of pure states.
fn grid_bound(ineq: &SteeringInequality, points: usize) -> f64 {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let grid: Vec<[f64; 3]> = (0..points)
        .map(|k| {
            let u = 1.0 - 2.0 * (k as f64 + 0.5) / points as f64;
            let r = (1.0 - u * u).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), u]
        })
        .collect();
    let m = ineq.m;
    let mut best = f64::NEG_INFINITY;
    for k in 0..1u64 << m {
        let mut v = ineq.s_b;
        let mut scalar = 0.0;
        for i in 0..m {
            let e = if k >> i & 1 == 0 { 1.0 } else { -1.0 };
            scalar += e * ineq.s_a[i];
            for j in 0..3 {
                v[j] += e * ineq.s[i][j];
            }
        }
        for r in &grid {
            best = best.max(scalar + v[0] * r[0] + v[1] * r[1] + v[2] * r[2]);
        }
    }
    best
}

fn ac7(suite: &mut Suite) {
    let id = "AC7 dual certificate soundness";
    let Some(m3) = suite.optimized_set(3) else {
        suite.record(id, false, "needs the optimized m = 3 set".into(), Duration::ZERO);
        return;
    };
    let t = Instant::now();
    let s = solver();
    let state = make_state(0.6).unwrap();
    let at_threshold = max_alpha(&m3, &s).and_then(|r| extract_inequality(&r.report, &m3));
    let fixed = assemble_program(&correlation_table(&state, &m3), enumerate_strategies(3).unwrap())
        .and_then(|p| solve_feasibility(&p, &s))
        .and_then(|r| extract_inequality(&r, &m3));
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, ineq) in [("from alpha*", at_threshold), ("from alpha=0.6", fixed)] {
        match ineq {
            Ok(ineq) => {
                let closed = lhs_bound(&ineq.s, &ineq.s_a, &ineq.s_b).unwrap();
                let grid = grid_bound(&ineq, 10_000);
                let violation = quantum_value(&ineq, &state, &m3).unwrap() - closed;
                ok &= violation >= 1e-4 && (closed - grid).abs() <= 1e-3 && grid <= closed + 1e-12;
                parts.push(format!("{name}: violation {violation:.4e}, L {closed:.6} vs grid {grid:.6}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    suite.record(id, ok, parts.join("; "), t.elapsed());
}

fn cli_result(args: &[&str], env: Option<(&str, &str)>, out: &Path) -> Option<String> {
    let mut c = Command::new(env!("CARGO_BIN_EXE_steerkit"));
    c.env_remove("STEERKIT_THREADS").env("RUST_LOG", "off").args(args).arg("--out").arg(out);
    if let Some((k, v)) = env {
        c.env(k, v);
    }
    let status = c.output().ok()?.status;
    if !status.success() {
        return None;
    }
    let text = std::fs::read_to_string(out).ok()?;
    text.find("\"result\":").map(|at| text[at..].to_string())
}

fn ac8(suite: &mut Suite) {
    let t = Instant::now();
    let s = solver();

    // PSD–SOC identity against an independent 2×2 Hermitian eigen-solver
    let mut rng = stream_rng(8, 0);
    let mut psd_dev = 0.0f64;
    for _ in 0..10_000 {
        let tr: f64 = rng.random_range(0.0..2.0);
        let r = uniform_direction(&mut rng) * rng.random_range(0.0..2.0);
        let half = |z: Complex64| z * 0.5;
        let m = Matrix2::new(
            half(Complex64::new(tr + r.z(), 0.0)),
            half(Complex64::new(r.x(), -r.y())),
            half(Complex64::new(r.x(), r.y())),
            half(Complex64::new(tr - r.z(), 0.0)),
        );
        let eig = m.symmetric_eigenvalues();
        psd_dev = psd_dev.max((eig[0].min(eig[1]) - (tr - r.norm()) / 2.0).abs());
    }

    // monotonicity under inclusion
    let mut violations = 0;
    for family in 0..20u64 {
        let mut rng = stream_rng(800 + family, 0);
        let full: Vec<_> = (0..5).map(|_| uniform_direction(&mut rng)).collect();
        let mut prev = f64::INFINITY;
        for k in 1..=full.len() {
            let set = MeasurementSet::new(full[..k].to_vec()).unwrap();
            suite.signaling = suite.signaling.max(no_signaling_check(&assemblage_from_measurements(
                &make_state(0.7).unwrap(),
                &set,
                Party::A,
            )));
            let a = max_alpha(&set, &s).unwrap().alpha_star;
            violations += usize::from(a > prev + 1e-6);
            prev = a;
        }
    }

    // byte-identical CLI payloads under a fixed seed, across thread counts
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let mut identical = true;
    for args in [
        &["alpha-star", "--m", "3", "--restarts", "4", "--seed", "11"][..],
        &["lhs-verify", "--samples", "1e5", "--random", "4", "--seed", "11"][..],
    ] {
        let first = cli_result(args, None, &a);
        let second = cli_result(args, Some(("STEERKIT_THREADS", "3")), &b);
        identical &= first.is_some() && first == second;
    }

    let ok = suite.signaling < 1e-10 && psd_dev <= 1e-12 && violations == 0 && identical;
    let detail = format!(
        "no-signaling max {:.1e} (tol 1e-10); PSD-SOC max dev {psd_dev:.1e} on 1e4 points (tol 1e-12); monotonicity violations {violations}/20 families; CLI payloads identical: {identical}",
        suite.signaling
    );
    suite.record("AC8 property suites", ok, detail, t.elapsed());
}

fn main() {
    let mut suite = Suite { lines: Vec::new(), signaling: 0.0, campaign: None };
    ac1(&mut suite);
    ac2(&mut suite);
    ac3(&mut suite);
    ac4(&mut suite);
    ac5(&mut suite);
    ac6(&mut suite);
    ac7(&mut suite);
    ac8(&mut suite);
    let failed = suite.lines.iter().filter(|l| matches!(l.verdict, Verdict::Fail)).count();
    let skipped = suite.lines.iter().filter(|l| matches!(l.verdict, Verdict::Skip)).count();
    println!("acceptance: {} passed, {failed} failed, {skipped} skipped", suite.lines.len() - failed - skipped);
    if failed > 0 {
        std::process::exit(1);
    }
}
