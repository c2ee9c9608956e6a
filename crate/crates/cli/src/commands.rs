use std::fmt::Write as _;
use std::path::PathBuf;

use log::warn;
use serde::Serialize;
use steerkit::feasibility::solver::ClarabelSolver;
use steerkit::feasibility::{
    assemble_assemblage_program, assemble_program, enumerate_strategies, quantum_value, solve_feasibility,
    FeasibilityReport, FeasibilityStatus, LocalStateEnsemble, Residuals, SteeringInequality,
};
use steerkit::io::{load_assemblage, load_measurements, load_state, read_json, LhsReportFile, PairsFile};
use steerkit::lhs::{
    analytic_expectations, binomial_standard_error, monte_carlo_pairs, quadrature_expectations, Expectations,
    ModelParameters,
};
use steerkit::optimizer::{hill_climb, table_one_campaign, table_one_value, CampaignConfig, RestartTrace};
use steerkit::pauli::{expectation, PSD_TOL};
use steerkit::rng::{stream_id, stream_rng, uniform_direction};
use steerkit::state::{
    correlation_table, entanglement_threshold, make_state, Provenance, INGEST_NO_SIGNALING_TOL, INGEST_TRACE_TOL,
};
use steerkit::{BlochVector, Party, QubitOperator};

use crate::manifest::{RowTiming, Run};
use crate::{
    AlphaStarArgs, CheckAssemblageArgs, CliError, InequalityArgs, LhsVerifyArgs, OutputArgs, StateInfoArgs,
    TableOneArgs, EXIT_AMBIGUOUS, EXIT_SOLVER, EXIT_VERIFICATION,
};

/// Below this many rounds `lhs-verify` reports without judging.
pub const MIN_VERIFY_SAMPLES: u64 = 1000;
/// Allowed deviation in null-hypothesis standard errors.
pub const Z_LIMIT: f64 = 5.0;
/// Allowed gap between quadrature and closed-form model values.
pub const QUADRATURE_TOL: f64 = 1e-7;

type Pairs = Vec<Vec<[f64; 2]>>;

fn qubit_pairs(op: &QubitOperator) -> Pairs {
    let m = op.matrix();
    (0..2).map(|r| (0..2).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn format_matrix(rows: &Pairs) -> String {
    let mut s = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|[re, im]| format!("{re:+.6}{im:+.6}i")).collect();
        let _ = writeln!(s, "  [{}]", cells.join("  "));
    }
    s
}

fn emit<T: Serialize>(run: Run, result: &T, output: &OutputArgs, summary: &str) -> Result<(), CliError> {
    let text = run.finish(result)?;
    if let Some(path) = &output.out {
        std::fs::write(path, &text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    }
    if output.json {
        print!("{text}");
    } else {
        print!("{summary}");
    }
    Ok(())
}

#[derive(Serialize)]
struct StateInfo {
    alpha: Option<f64>,
    matrix: Pairs,
    reduced_a: Pairs,
    reduced_b: Pairs,
    ppt_min_eigenvalue: f64,
    verdict: &'static str,
    threshold: f64,
}

pub fn state_info(args: &StateInfoArgs) -> Result<u8, CliError> {
    let run = Run::start("state-info", args, None)?;
    let state = match (&args.source.alpha, &args.source.state) {
        (Some(alpha), _) => make_state(*alpha)?,
        (None, Some(path)) => load_state(path)?,
        (None, None) => return Err(CliError::input("either --alpha or --state is required")),
    };
    let ppt = state.ppt_min_eigenvalue();
    let info = StateInfo {
        alpha: match state.provenance() {
            Provenance::Family { alpha } => Some(alpha),
            Provenance::Custom => None,
        },
        matrix: state.operator().to_pairs(),
        reduced_a: qubit_pairs(&state.reduced(Party::A)),
        reduced_b: qubit_pairs(&state.reduced(Party::B)),
        ppt_min_eigenvalue: ppt,
        verdict: if ppt < -PSD_TOL { "entangled" } else { "PPT/separable-region" },
        threshold: entanglement_threshold()?,
    };
    let mut s = String::new();
    if let Some(a) = info.alpha {
        let _ = writeln!(s, "alpha = {a}");
    }
    let _ = write!(s, "density matrix:\n{}", format_matrix(&info.matrix));
    let _ = write!(s, "reduced state A:\n{}", format_matrix(&info.reduced_a));
    let _ = write!(s, "reduced state B:\n{}", format_matrix(&info.reduced_b));
    let _ = writeln!(s, "PPT minimum eigenvalue: {:.12}", info.ppt_min_eigenvalue);
    let _ = writeln!(s, "verdict: {}", info.verdict);
    let _ = writeln!(s, "entanglement threshold: alpha > {:.6}", info.threshold);
    emit(run, &info, &args.output, &s)?;
    Ok(0)
}

#[derive(Serialize)]
struct PairCheck {
    i: usize,
    j: usize,
    expected: Expectations,
    z: Expectations,
    max_z: f64,
    pass: bool,
}

#[derive(Serialize)]
struct LhsVerify {
    report: LhsReportFile,
    checks: Vec<PairCheck>,
    quadrature_max_deviation: f64,
    flip_probability: f64,
    mode: &'static str,
    passed: bool,
}

fn trace_values(x: &BlochVector, y: &BlochVector) -> Result<Expectations, CliError> {
    let state = make_state(0.5)?;
    let (ox, oy, id) = (QubitOperator::observable(x), QubitOperator::observable(y), QubitOperator::identity());
    Ok(Expectations {
        ea: expectation(state.operator(), &ox, &id),
        eb: expectation(state.operator(), &id, &oy),
        eab: expectation(state.operator(), &ox, &oy),
    })
}

pub fn lhs_verify(args: &LhsVerifyArgs) -> Result<u8, CliError> {
    let run = Run::start("lhs-verify", args, Some(args.seed))?;
    if args.samples == 0 {
        return Err(CliError::input("--samples must be at least 1"));
    }
    let params = ModelParameters::new(args.flip_probability)?;
    let pairs: Vec<(BlochVector, BlochVector)> = match (&args.pairs, args.random) {
        (Some(path), _) => read_json::<PairsFile>(path)?.to_pairs()?,
        (None, Some(k)) => {
            let mut rng = stream_rng(args.seed, stream_id(u32::MAX, 0));
            (0..k).map(|_| (uniform_direction(&mut rng), uniform_direction(&mut rng))).collect()
        }
        (None, None) => return Err(CliError::input("either --pairs or --random is required")),
    };
    if pairs.is_empty() {
        return Err(CliError::input("no measurement pairs given"));
    }

    let mut quad_dev: f64 = 0.0;
    for (x, y) in &pairs {
        let q = quadrature_expectations(x, y, &params)?;
        quad_dev = quad_dev.max(q.max_abs_diff(&analytic_expectations(x, y, &params)));
    }
    let mc = monte_carlo_pairs(&pairs, args.samples, args.seed, &params)?;
    let n = args.samples;
    let mut checks = Vec::with_capacity(pairs.len());
    for p in &mc.pairs {
        let e = trace_values(&p.x, &p.y)?;
        let z = |mean: f64, exp: f64| (mean - exp).abs() / binomial_standard_error(exp, n);
        let z = Expectations { ea: z(p.mean.ea, e.ea), eb: z(p.mean.eb, e.eb), eab: z(p.mean.eab, e.eab) };
        let max_z = z.ea.max(z.eb).max(z.eab);
        checks.push(PairCheck { i: p.i + 1, j: p.j + 1, expected: e, z, max_z, pass: max_z <= Z_LIMIT });
    }
    let report_only = n < MIN_VERIFY_SAMPLES;
    let quad_ok = quad_dev <= QUADRATURE_TOL;
    let passed = quad_ok && (report_only || checks.iter().all(|c| c.pass));
    let result = LhsVerify {
        report: LhsReportFile::from(&mc),
        checks,
        quadrature_max_deviation: quad_dev,
        flip_probability: args.flip_probability,
        mode: if report_only { "report-only" } else { "verified" },
        passed,
    };

    let mut s = String::new();
    let _ = writeln!(s, "{} pairs, {} rounds each, seed {}", pairs.len(), n, args.seed);
    let _ = writeln!(s, "quadrature vs closed form: max deviation {quad_dev:.3e}");
    let worst = result.checks.iter().map(|c| c.max_z).fold(0.0, f64::max);
    let _ = writeln!(s, "largest deviation from trace values: {worst:.2} standard errors");
    if report_only {
        let _ = writeln!(s, "fewer than {MIN_VERIFY_SAMPLES} rounds: report only");
    }
    for c in result.checks.iter().filter(|c| !c.pass && !report_only) {
        let _ = writeln!(s, "FAILED pair {}: z = ({:.2}, {:.2}, {:.2})", c.i, c.z.ea, c.z.eb, c.z.eab);
    }
    let _ = writeln!(s, "{}", if passed { "verified" } else { "verification failed" });
    emit(run, &result, &args.output, &s)?;
    Ok(if passed { 0 } else { EXIT_VERIFICATION })
}

#[derive(Serialize)]
struct AlphaStarResult {
    m: usize,
    alpha_star: f64,
    clamped: bool,
    directions: Vec<[f64; 3]>,
    restarts: Vec<RestartTrace>,
    solver_calls: u64,
    paper_alpha_star: Option<f64>,
}

fn solver_error(e: steerkit::SteerError) -> CliError {
    let mut err = CliError::from(e);
    if err.code != crate::EXIT_INPUT {
        err.code = EXIT_SOLVER;
    }
    err
}

pub fn alpha_star(args: &AlphaStarArgs) -> Result<u8, CliError> {
    let run = Run::start("alpha-star", args, Some(args.search.seed))?;
    let m = usize::from(args.m);
    if m == 1 {
        eprintln!("warning: a single measurement never demonstrates steering; alpha* is clamped at 1");
    }
    let result = hill_climb(&args.search.config(m), &ClarabelSolver::default()).map_err(solver_error)?;
    let out = AlphaStarResult {
        m,
        alpha_star: result.alpha_star,
        clamped: result.alpha_star >= 1.0,
        directions: result.best.directions().iter().map(|d| d.0).collect(),
        restarts: result.restarts,
        solver_calls: result.solver_calls,
        paper_alpha_star: if args.paper_values { table_one_value(m) } else { None },
    };
    let mut s = format!("alpha*({m}) = {:.6}", out.alpha_star);
    if let Some(p) = out.paper_alpha_star {
        let _ = write!(s, "  (published {p:.4}, delta {:+.5})", out.alpha_star - p);
    }
    let _ = writeln!(s, "\n{} solver calls; directions:", out.solver_calls);
    for d in &out.directions {
        let _ = writeln!(s, "  [{:+.9}, {:+.9}, {:+.9}]", d[0], d[1], d[2]);
    }
    emit(run, &out, &args.output, &s)?;
    Ok(0)
}

#[derive(Serialize)]
struct InequalityResult {
    alpha: f64,
    directions: Vec<[f64; 3]>,
    status: FeasibilityStatus,
    inequality: Option<SteeringInequality>,
    quantum_value: Option<f64>,
    violation: Option<f64>,
    ensemble: Option<LocalStateEnsemble>,
    residuals: Residuals,
}

fn residual_line(r: &Residuals) -> String {
    format!(
        "residuals: primal {:.2e}, dual {:.2e}, shortfall {:.2e}, reconstruction {:.2e}, violation {}",
        r.primal,
        r.dual,
        r.shortfall,
        r.reconstruction,
        r.violation.map_or("n/a".to_string(), |v| format!("{v:.2e}"))
    )
}

pub fn inequality(args: &InequalityArgs) -> Result<u8, CliError> {
    let run = Run::start("inequality", args, None)?;
    let meas = load_measurements(&args.measurements)?;
    let state = make_state(args.alpha)?;
    let program = assemble_program(&correlation_table(&state, &meas), enumerate_strategies(meas.len())?)?;
    let report = solve_feasibility(&program, &ClarabelSolver::default()).map_err(solver_error)?;
    let (inequality, quantum, violation, ensemble) = match report.status {
        FeasibilityStatus::Infeasible => {
            let ineq = report.inequality.clone();
            let q = ineq.as_ref().map(|i| quantum_value(i, &state, &meas)).transpose()?;
            let v = match (&ineq, q) {
                (Some(i), Some(q)) => Some(q - i.bound),
                _ => None,
            };
            (ineq, q, v, None)
        }
        FeasibilityStatus::Feasible => (None, None, None, report.ensemble.clone().map(|e| e.pruned(1e-12))),
        FeasibilityStatus::NumericallyAmbiguous => (None, None, None, None),
    };
    let result = InequalityResult {
        alpha: args.alpha,
        directions: meas.directions().iter().map(|d| d.0).collect(),
        status: report.status,
        inequality,
        quantum_value: quantum,
        violation,
        ensemble,
        residuals: report.residuals.clone(),
    };
    let mut s = String::new();
    match report.status {
        FeasibilityStatus::Infeasible => {
            let ineq = result.inequality.as_ref().expect("infeasible reports carry an inequality");
            let _ = writeln!(s, "steerable at alpha = {}: inequality violated", args.alpha);
            let _ = writeln!(s, "L = {:.9}, quantum value = {:.9}, violation = {:.3e}", ineq.bound, quantum.unwrap_or(f64::NAN), violation.unwrap_or(f64::NAN));
        }
        FeasibilityStatus::Feasible => {
            let n = result.ensemble.as_ref().map_or(0, |e| e.members.len());
            let _ = writeln!(s, "unsteerable at alpha = {}: local model with {n} strategies", args.alpha);
        }
        FeasibilityStatus::NumericallyAmbiguous => {
            let _ = writeln!(s, "numerically ambiguous at alpha = {}", args.alpha);
        }
    }
    let _ = writeln!(s, "{}", residual_line(&result.residuals));
    emit(run, &result, &args.output, &s)?;
    if report.status == FeasibilityStatus::NumericallyAmbiguous {
        eprintln!("{}", residual_line(&report.residuals));
        return Ok(EXIT_AMBIGUOUS);
    }
    Ok(0)
}

#[derive(Serialize)]
struct CheckAssemblageResult {
    verdict: &'static str,
    m: usize,
    report: FeasibilityReport,
}

pub fn check_assemblage(args: &CheckAssemblageArgs) -> Result<u8, CliError> {
    let run = Run::start("check-assemblage", args, None)?;
    let asm = load_assemblage(&args.input)?;
    let problems = asm.violations(PSD_TOL, INGEST_NO_SIGNALING_TOL, INGEST_TRACE_TOL);
    if !problems.is_empty() {
        let mut msg = format!("invalid assemblage in {}:", args.input.display());
        for p in &problems {
            let _ = write!(msg, "\n  - {p}");
        }
        return Err(CliError::input(msg));
    }
    let m = asm.members.len();
    let program = assemble_assemblage_program(&asm, enumerate_strategies(m)?)?;
    let mut report = solve_feasibility(&program, &ClarabelSolver::default()).map_err(solver_error)?;
    let verdict = match report.status {
        FeasibilityStatus::Feasible => "unsteerable",
        FeasibilityStatus::Infeasible => "steerable",
        FeasibilityStatus::NumericallyAmbiguous => "ambiguous",
    };
    if report.status == FeasibilityStatus::Infeasible {
        report.ensemble = None;
    } else {
        report.ensemble = report.ensemble.map(|e| e.pruned(1e-12));
    }
    let mut s = format!("{verdict} ({m} measurements)\n");
    if let Some(ineq) = &report.inequality {
        let _ = writeln!(s, "certificate: inequality with L = {:.9}, violation {:.3e}", ineq.bound, report.residuals.violation.unwrap_or(f64::NAN));
    }
    let _ = writeln!(s, "{}", residual_line(&report.residuals));
    let ambiguous = report.status == FeasibilityStatus::NumericallyAmbiguous;
    emit(run, &CheckAssemblageResult { verdict, m, report }, &args.output, &s)?;
    Ok(if ambiguous { EXIT_AMBIGUOUS } else { 0 })
}

#[derive(Serialize)]
struct TableRow {
    m: usize,
    alpha_star: f64,
    directions: Vec<[f64; 3]>,
    solver_calls: u64,
    paper_alpha_star: Option<f64>,
    delta: Option<f64>,
}

#[derive(Serialize)]
struct TableOneResult {
    rows: Vec<TableRow>,
    failures: Vec<steerkit::optimizer::CampaignFailure>,
}

fn table_csv(result: &TableOneResult) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "alpha_star", "paper_alpha_star", "delta", "solver_calls", "directions"]).map_err(CliError::internal)?;
    let num = |x: Option<f64>| x.map_or(String::new(), |v| steerkit::io::round_significant(v).to_string());
    for r in &result.rows {
        let dirs = serde_json::to_string(&steerkit::io::to_rounded_value(&r.directions)?).map_err(CliError::internal)?;
        w.write_record([
            r.m.to_string(),
            num(Some(r.alpha_star)),
            num(r.paper_alpha_star),
            num(r.delta),
            r.solver_calls.to_string(),
            dirs,
        ])
        .map_err(CliError::internal)?;
    }
    for f in &result.failures {
        w.write_record([f.m.to_string(), String::new(), num(table_one_value(f.m)), String::new(), String::new(), format!("failed: {}", f.message)])
            .map_err(CliError::internal)?;
    }
    w.into_inner().map_err(CliError::internal)
}

pub fn table_one(args: &TableOneArgs) -> Result<u8, CliError> {
    let mut run = Run::start("table-one", args, Some(args.seed))?;
    let mut config = CampaignConfig::new(usize::from(args.m_max), args.seed);
    config.search.restarts = args.budget;
    config.search.max_evaluations = args.max_evaluations;
    config.cold_start_max = args.cold_start_max;
    config.checkpoint = args.checkpoint.clone();
    let (table, timings) = table_one_campaign(&config, &ClarabelSolver::default()).map_err(solver_error)?;
    for f in &table.failures {
        warn!("m={} failed: {}", f.m, f.message);
    }
    let result = TableOneResult {
        rows: table
            .rows
            .iter()
            .map(|r| {
                let paper = if args.paper_values { r.paper_alpha_star } else { None };
                TableRow {
                    m: r.m,
                    alpha_star: r.alpha_star,
                    directions: r.directions.iter().map(|d| d.0).collect(),
                    solver_calls: r.solver_calls,
                    paper_alpha_star: paper,
                    delta: paper.map(|p| r.alpha_star - p),
                }
            })
            .collect(),
        failures: table.failures.clone(),
    };
    run.set_timings(timings.into_iter().map(|(m, seconds)| RowTiming { m, seconds }).collect());
    let csv = table_csv(&result)?;
    if let Some(path) = &args.out {
        run.write_output(path, &csv)?;
    }
    let text = run.finish(&result)?;
    if let Some(path) = &args.out {
        let mut json_path = path.clone().into_os_string();
        json_path.push(".json");
        let json_path = PathBuf::from(json_path);
        std::fs::write(&json_path, &text).map_err(|e| CliError::input(format!("cannot write {}: {e}", json_path.display())))?;
    }
    if args.json {
        print!("{text}");
    } else {
        print!("{}", String::from_utf8_lossy(&csv));
    }
    Ok(if table.failures.is_empty() { 0 } else { EXIT_SOLVER })
}
