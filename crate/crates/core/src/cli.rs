//! The `varmp` command line: check, eigen, geometry, solve, multiplicity, demo.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::write_atomic;
use crate::energy::Functional;
use crate::error::{Error, Result};
use crate::hypotheses::{check_model, HypothesisReport, Sampler};
use crate::mesh::{parse_mesh_spec, Mesh};
use crate::models::{Model, ModelDecl};
use crate::solver::{
    mountain_pass, symmetric_multiplicity, verify_geometry, Classification, GeometryReport,
    SolveConfig, SolveResult,
};
use crate::spectrum::{first_eigenpair, subspace_ladder, SpectralResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_GEOMETRY: i32 = 5;

const DEMO_MESH: &str = "interval:100";

#[derive(Debug, Parser)]
#[command(
    name = "varmp",
    version,
    about = "Mountain-pass and multiplicity toolkit for quasilinear elliptic systems",
    after_help = "Exit codes: 0 success, 2 hypothesis failure, 3 configuration error, \
                  4 non-convergence, 5 geometry failure.\n\
                  VARMP_THREADS caps the worker threads."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for result files; created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Suppress the human-readable table.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveOpts {
    /// Mesh: `interval:<n>[:<length>]`, `square:<nx>x<ny>`, or a mesh file.
    #[arg(long, default_value = "interval:200")]
    pub mesh: String,
    /// Stop once the CPS quantity is at most this.
    #[arg(long = "tol", default_value_t = 1e-6)]
    pub tol_cps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 21)]
    pub path_points: usize,
}

impl SolveOpts {
    fn config(&self, seed: u64) -> SolveConfig {
        SolveConfig {
            tol_cps: self.tol_cps,
            max_iters: self.max_iters,
            path_points: self.path_points,
            seed,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every structural hypothesis of a model file.
    Check { model: PathBuf },
    /// First eigenpair of the p-Laplacian, optionally with a subspace ladder.
    Eigen {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value = "interval:200")]
        mesh: String,
        /// Ladder depth; 0 skips the ladder.
        #[arg(long, default_value_t = 0)]
        modes: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Certify the mountain-pass geometry.
    Geometry {
        model: PathBuf,
        #[arg(long, default_value = "interval:200")]
        mesh: String,
    },
    /// Mountain-pass critical point.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Several symmetric critical points of an even model.
    Multiplicity {
        model: PathBuf,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Full pipeline on the bundled coupled pass-set model.
    Demo,
}

/// Outcome of one command: JSON report, table lines, exit code.
struct Outcome {
    report: Value,
    table: Vec<String>,
    code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GeometryUnavailable(_)
        | Error::SuperlinearityNotDetected { .. }
        | Error::GeometryViolation { .. } => EXIT_GEOMETRY,
        Error::Convergence { .. }
        | Error::StepFailure { .. }
        | Error::Singular { .. }
        | Error::Evaluation { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` and runs the command, writing reports to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(out, "error: {e}");
        return EXIT_CONFIG;
    }
    let g = cli.global.clone();
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let code = exit_code(&e);
            let report = json!({
                "command": command_name(&cli.command),
                "error": e.to_string(),
                "exit_code": code,
            });
            Outcome {
                report,
                table: vec![format!("error: {e}")],
                code,
            }
        }
    };
    if g.json {
        let _ = writeln!(out, "{}", to_json(&outcome.report));
    } else if !g.quiet {
        for line in &outcome.table {
            let _ = writeln!(out, "{line}");
        }
    }
    outcome.code
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("VARMP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "VARMP_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Eigen { .. } => "eigen",
        Command::Geometry { .. } => "geometry",
        Command::Solve { .. } => "solve",
        Command::Multiplicity { .. } => "multiplicity",
        Command::Demo => "demo",
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn load_model(path: &Path) -> Result<Model> {
    ModelDecl::from_file(path)?.build()
}

fn prepare_out(dir: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    Ok(dir.clone())
}

fn defaults_echo(cfg: &SolveConfig) -> Value {
    json!({
        "tol_cps": cfg.tol_cps,
        "path_points": cfg.path_points,
        "max_iters": cfg.max_iters,
        "seed": cfg.seed,
    })
}

fn seeded_defaults(seed: u64) -> Value {
    defaults_echo(&SolveConfig {
        seed,
        ..SolveConfig::default()
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let out = prepare_out(&g.out)?;
    match &cli.command {
        Command::Check { model } => cmd_check(model, g.seed),
        Command::Eigen {
            p,
            mesh,
            modes,
            tol,
        } => cmd_eigen(*p, mesh, *modes, *tol, g.seed, out.as_deref()),
        Command::Geometry { model, mesh } => cmd_geometry(model, mesh, g.seed, out.as_deref()),
        Command::Solve { model, opts } => cmd_solve(model, opts, g.seed, out.as_deref()),
        Command::Multiplicity { model, count, opts } => {
            cmd_multiplicity(model, *count, opts, g.seed, out.as_deref())
        }
        Command::Demo => cmd_demo(g.seed, out.as_deref()),
    }
}

fn check_report(model: &Model, seed: u64) -> Result<HypothesisReport> {
    check_model(model, &Sampler::for_radius(model.g.r, seed))
}

fn verdict_table(rep: &HypothesisReport) -> Vec<String> {
    let mut t = vec![format!("{:<12} {}", "condition", "verdict")];
    for (k, v) in &rep.verdicts {
        let tag = serde_json::to_value(v)
            .ok()
            .and_then(|x| x.as_str().map(String::from))
            .unwrap_or_default();
        let mut line = format!("{k:<12} {tag}");
        if let Some(w) = rep.witnesses.get(k) {
            line.push_str(&format!("  ({})", w.detail));
        }
        t.push(line);
    }
    t.push(format!(
        "overall      {}",
        if rep.overall_pass() { "pass" } else { "fail" }
    ));
    t
}

fn cmd_check(path: &Path, seed: u64) -> Result<Outcome> {
    let model = load_model(path)?;
    let rep = check_report(&model, seed)?;
    let pass = rep.overall_pass();
    Ok(Outcome {
        report: json!({
            "command": "check",
            "model": path.display().to_string(),
            "seed": seed,
            "config": seeded_defaults(seed),
            "overall": if pass { "pass" } else { "fail" },
            "failed": rep.failed(),
            "report": value(&rep),
            "exit_code": if pass { EXIT_OK } else { EXIT_HYPOTHESIS },
        }),
        table: verdict_table(&rep),
        code: if pass { EXIT_OK } else { EXIT_HYPOTHESIS },
    })
}

fn write_field_csv(path: &Path, mesh: &Mesh, cols: &[(&str, &[f64])]) -> Result<()> {
    let mut s = String::from("node,x");
    if mesh.dim() == 2 {
        s.push_str(",y");
    }
    for (name, _) in cols {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (i, x) in mesh.nodes().iter().enumerate() {
        s.push_str(&format!("{i},{:.16e}", x[0]));
        if mesh.dim() == 2 {
            s.push_str(&format!(",{:.16e}", x[1]));
        }
        for (_, c) in cols {
            s.push_str(&format!(",{:.16e}", c[i]));
        }
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

fn cmd_eigen(
    p: f64,
    mesh_spec: &str,
    modes: usize,
    tol: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<Outcome> {
    let mesh = parse_mesh_spec(mesh_spec)?;
    let r = first_eigenpair(p, &mesh, tol)?;
    let mut report = json!({
        "command": "eigen",
        "config": seeded_defaults(seed),
        "p": p,
        "mesh": mesh_spec,
        "lambda": r.lambda,
        "residual": r.residual,
        "iterations": r.iterations,
        "exit_code": EXIT_OK,
    });
    let mut table = vec![
        format!("lambda_1   {:.12e}", r.lambda),
        format!("residual   {:.3e}", r.residual),
        format!("iterations {}", r.iterations),
    ];
    let ladder = if modes > 0 {
        let l = subspace_ladder(p, &mesh, modes)?;
        report["lambda_hat"] = value(&l.lambda_hat);
        for (k, v) in l.lambda_hat.iter().enumerate() {
            table.push(format!("lambda_hat[{}] {:.12e}", k + 1, v));
        }
        Some(l)
    } else {
        None
    };
    if let Some(dir) = out {
        let mut cols: Vec<(String, &[f64])> = vec![("phi".into(), &r.phi[..])];
        if let Some(l) = &ladder {
            for (k, b) in l.basis.iter().enumerate() {
                cols.push((format!("psi{}", k + 1), &b[..]));
            }
        }
        let cols: Vec<(&str, &[f64])> = cols.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        write_field_csv(&dir.join("eigen.csv"), &mesh, &cols)?;
        write_atomic(&dir.join("eigen.json"), to_json(&report).as_bytes())?;
    }
    Ok(Outcome {
        report,
        table,
        code: EXIT_OK,
    })
}

fn spectra(model: &Model, mesh: &Mesh) -> Result<(SpectralResult, SpectralResult)> {
    let s1 = first_eigenpair(model.p1, mesh, 1e-9)?;
    let s2 = if model.p2 == model.p1 {
        s1.clone()
    } else {
        first_eigenpair(model.p2, mesh, 1e-9)?
    };
    Ok((s1, s2))
}

fn geometry_value(geo: &GeometryReport, mesh: &Mesh) -> Value {
    let mut v = value(geo);
    if let Value::Object(m) = &mut v {
        m.remove("e_state");
        m.insert("e_norm_W".into(), json!(geo.e_state.norm_w(mesh)));
    }
    v
}

fn geometry_table(geo: &GeometryReport) -> Vec<String> {
    vec![
        format!("lambda_bar     {:.6e}", geo.lambda_bar),
        format!("sigma_star     {:.6e}", geo.sigma_star),
        format!("R0             {:.6e}", geo.r0),
        format!("rho0           {:.6e}", geo.rho0),
        format!("J(e)           {:.6e}", geo.e_energy),
        format!(
            "sphere min J   {:.6e} ({} samples, {} below rho0)",
            geo.sphere_min_J, geo.sphere_samples, geo.sphere_violations
        ),
    ]
}

fn cmd_geometry(path: &Path, mesh_spec: &str, seed: u64, out: Option<&Path>) -> Result<Outcome> {
    let model = load_model(path)?;
    let mesh = parse_mesh_spec(mesh_spec)?;
    let f = Functional::new(&mesh, &model)?;
    let (s1, s2) = spectra(&model, &mesh)?;
    let geo = verify_geometry(&f, [&s1, &s2], seed)?;
    let code = if geo.sphere_violations == 0 {
        EXIT_OK
    } else {
        EXIT_GEOMETRY
    };
    let report = json!({
        "command": "geometry",
        "model": path.display().to_string(),
        "mesh": mesh_spec,
        "seed": seed,
        "config": seeded_defaults(seed),
        "geometry": geometry_value(&geo, &mesh),
        "exit_code": code,
    });
    if let Some(dir) = out {
        write_atomic(&dir.join("geometry.json"), to_json(&report).as_bytes())?;
        write_field_csv(
            &dir.join("e_state.csv"),
            &mesh,
            &[("u", &geo.e_state.u[..]), ("v", &geo.e_state.v[..])],
        )?;
    }
    Ok(Outcome {
        report,
        table: geometry_table(&geo),
        code,
    })
}

fn result_value(r: &SolveResult, mesh: &Mesh) -> Value {
    let (wu, wv) = r.state.norms_w(mesh);
    json!({
        "level": r.level,
        "cps_final": r.cps_final,
        "iterations": r.iterations,
        "classification": r.classification,
        "residual": r.residual,
        "norm_W": [wu, wv],
        "trace_summary": r.trace.summary(),
    })
}

fn write_result_dir(dir: &Path, f: &Functional, r: &SolveResult, report: &Value) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("result.json"), to_json(report).as_bytes())?;
    let c = f.differential(&r.state)?;
    let mut buf = Vec::new();
    f.write_csv(&r.state, &c, &mut buf)?;
    write_atomic(&dir.join("fields.csv"), &buf)?;
    r.trace.export(&dir.join("trace.csv"))
}

fn classification_code(c: Classification) -> i32 {
    match c {
        Classification::Converged => EXIT_OK,
        _ => EXIT_NONCONVERGENCE,
    }
}

fn cmd_solve(path: &Path, opts: &SolveOpts, seed: u64, out: Option<&Path>) -> Result<Outcome> {
    let model = load_model(path)?;
    let mesh = parse_mesh_spec(&opts.mesh)?;
    let cfg = opts.config(seed);
    cfg.validate()?;
    let f = Functional::new(&mesh, &model)?;
    let (s1, s2) = spectra(&model, &mesh)?;
    let geo = verify_geometry(&f, [&s1, &s2], seed)?;
    let r = mountain_pass(&f, &geo, &cfg)?;
    let code = classification_code(r.classification);
    let report = json!({
        "command": "solve",
        "model": path.display().to_string(),
        "mesh": opts.mesh,
        "config": defaults_echo(&cfg),
        "geometry": geometry_value(&geo, &mesh),
        "result": result_value(&r, &mesh),
        "exit_code": code,
    });
    if let Some(dir) = out {
        write_result_dir(dir, &f, &r, &report)?;
    }
    let mut table = geometry_table(&geo);
    table.extend([
        format!("level          {:.12e}", r.level),
        format!("cps            {:.3e}", r.cps_final),
        format!("iterations     {}", r.iterations),
        format!(
            "status         {}",
            value(&r.classification).as_str().unwrap_or("")
        ),
    ]);
    Ok(Outcome {
        report,
        table,
        code,
    })
}

fn cmd_multiplicity(
    path: &Path,
    count: usize,
    opts: &SolveOpts,
    seed: u64,
    out: Option<&Path>,
) -> Result<Outcome> {
    if count == 0 {
        return Err(Error::Config("count must be positive".into()));
    }
    let model = load_model(path)?;
    let mesh = parse_mesh_spec(&opts.mesh)?;
    let cfg = opts.config(seed);
    cfg.validate()?;
    let f = Functional::new(&mesh, &model)?;
    let l1 = subspace_ladder(model.p1, &mesh, count + 1)?;
    let l2 = if model.p2 == model.p1 {
        l1.clone()
    } else {
        subspace_ladder(model.p2, &mesh, count + 1)?
    };
    let m = symmetric_multiplicity(&f, [&l1, &l2], count, &cfg)?;
    let code = if m.results.len() >= count {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    };
    let mut dirs = Vec::new();
    let mut results = Vec::new();
    let mut table = vec![format!("{:<4} {:>22} {:>12}", "k", "level", "cps")];
    for (k, r) in m.results.iter().enumerate() {
        let rv = result_value(r, &mesh);
        if let Some(base) = out {
            let dir = base.join(format!("solution_{}", k + 1));
            let single = json!({
                "command": "multiplicity",
                "index": k + 1,
                "config": defaults_echo(&cfg),
                "result": rv,
            });
            write_result_dir(&dir, &f, r, &single)?;
            dirs.push(dir.display().to_string());
        }
        table.push(format!(
            "{:<4} {:>22.12e} {:>12.3e}",
            k + 1,
            r.level,
            r.cps_final
        ));
        results.push(rv);
    }
    table.extend(m.warnings.iter().map(|w| format!("warning: {w}")));
    let report = json!({
        "command": "multiplicity",
        "model": path.display().to_string(),
        "mesh": opts.mesh,
        "count": count,
        "config": defaults_echo(&cfg),
        "results": results,
        "radii": value(&m.radii),
        "warnings": m.warnings,
        "directories": dirs,
        "exit_code": code,
    });
    if let Some(base) = out {
        write_atomic(&base.join("multiplicity.json"), to_json(&report).as_bytes())?;
    }
    Ok(Outcome {
        report,
        table,
        code,
    })
}

/// check → eigen → geometry → solve on the bundled coupled model.
fn cmd_demo(seed: u64, out: Option<&Path>) -> Result<Outcome> {
    let decl = ModelDecl::cor1();
    let model = decl.build()?;
    let mesh = parse_mesh_spec(DEMO_MESH)?;
    let cfg = SolveConfig {
        seed,
        ..SolveConfig::default()
    };
    let rep = check_report(&model, seed)?;
    let f = Functional::new(&mesh, &model)?;
    let (s1, s2) = spectra(&model, &mesh)?;
    let geo = verify_geometry(&f, [&s1, &s2], seed)?;
    let r = mountain_pass(&f, &geo, &cfg)?;
    let code = if !rep.overall_pass() {
        EXIT_HYPOTHESIS
    } else {
        classification_code(r.classification)
    };
    let summary = json!({
        "command": "demo",
        "model": decl.to_text(),
        "mesh": DEMO_MESH,
        "config": defaults_echo(&cfg),
        "check": {
            "overall": if rep.overall_pass() { "pass" } else { "fail" },
            "verdicts": value(&rep.verdicts),
        },
        "eigen": { "lambda_11": s1.lambda, "lambda_21": s2.lambda },
        "geometry": geometry_value(&geo, &mesh),
        "result": result_value(&r, &mesh),
        "exit_code": code,
    });
    if let Some(dir) = out {
        write_atomic(&dir.join("demo_summary.json"), to_json(&summary).as_bytes())?;
        write_result_dir(&dir.join("solve"), &f, &r, &summary)?;
    }
    let mut table = vec![format!(
        "check          {}",
        if rep.overall_pass() { "pass" } else { "fail" }
    )];
    table.push(format!("lambda_11      {:.12e}", s1.lambda));
    table.extend(geometry_table(&geo));
    table.extend([
        format!("level          {:.12e}", r.level),
        format!("cps            {:.3e}", r.cps_final),
        format!("iterations     {}", r.iterations),
    ]);
    Ok(Outcome {
        report: summary,
        table,
        code,
    })
}
