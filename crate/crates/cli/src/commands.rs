use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use tsplit::diagnostics::{snr_db, write_csv};
use tsplit::image::{GrayImage, ImageError, PgmEncoding};
use tsplit::linalg::Vector;
use tsplit::problems::{
    gen_deblur, gen_feas2d, gen_lasso, gen_scad_with, gen_three_op, load_instance, save_instance, AlgorithmOverrides,
    BuiltProblem, ProblemError, ProblemInstance, ProblemKind, DEFAULT_DEBLUR_REG, DEFAULT_LASSO_REG,
};
use tsplit::splitting::{
    averaging_constant, run, validate, Algorithm, AlgorithmKind, InertialParams, LedgerSetup, RunOptions, RunRecord,
    SplittingError, StopRule, Termination,
};

use crate::args::*;
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_STRUCTURAL: i32 = 2;
pub const EXIT_CONDITIONS: i32 = 3;
pub const EXIT_MAX_ITERS: i32 = 4;
pub const EXIT_DIVERGENCE: i32 = 5;

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn overrides(p: &ParamArgs) -> AlgorithmOverrides {
    AlgorithmOverrides {
        theta: p.theta,
        delta: p.delta,
        rho: p.rho,
        gamma_scale: p.gamma_scale,
    }
}

fn parse_alg(name: &str) -> Result<AlgorithmKind, CliError> {
    name.trim().parse::<AlgorithmKind>().map_err(|e| CliError::usage(e.to_string()))
}

fn termination_code(t: Termination) -> i32 {
    match t {
        Termination::Tolerance => EXIT_OK,
        Termination::MaxIters => EXIT_MAX_ITERS,
        Termination::Divergence => EXIT_DIVERGENCE,
    }
}

fn load(path: &Path) -> Result<ProblemInstance, CliError> {
    load_instance(path).map_err(|e| match e {
        ProblemError::Io(err) => CliError::no_input(format!("cannot read instance {}: {err}", path.display())),
        other => CliError::data(format!("{}: {other}", path.display())),
    })
}

fn load_image(args: &ImageArgs) -> Result<GrayImage, CliError> {
    match &args.image {
        Some(path) => GrayImage::read_pgm(path).map_err(|e| match e {
            ImageError::Io(err) => CliError::no_input(format!("cannot read image {}: {err}", path.display())),
            other => CliError::no_input(format!("{}: {other}", path.display())),
        }),
        None => Ok(match args.builtin {
            BuiltinImage::Pattern => GrayImage::test_pattern(64, 64),
            BuiltinImage::Gradient => GrayImage::gradient(64, 64),
        }),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::cant_create(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::cant_create(format!("{}: {e}", path.display())))
}

fn write_records(path: &Path, rec: &RunRecord) -> Result<(), CliError> {
    let mut out = create(path)?;
    write_csv(&mut out, &rec.records)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::cant_create(format!("{}: {e}", path.display())))
}

fn problem_error(e: ProblemError) -> CliError {
    match e {
        ProblemError::Splitting(s) => splitting_error(s),
        ProblemError::Io(err) => CliError::no_input(err.to_string()),
        ProblemError::Parse { .. } => CliError::data(e.to_string()),
        other => CliError::usage(other.to_string()),
    }
}

fn splitting_error(e: SplittingError) -> CliError {
    match e {
        SplittingError::Structural(_) => CliError::new(EXIT_STRUCTURAL, e.to_string()),
        SplittingError::UnknownAlgorithm(_) | SplittingError::NotApplicable { .. } => CliError::usage(e.to_string()),
        other => CliError::data(other.to_string()),
    }
}

/// Print the condition table to stderr when the inertial parameters violate it.
fn surface_conditions(alg: &Algorithm) -> Result<(), CliError> {
    if let Some(params) = alg.inertial_params() {
        let report = validate(&params).map_err(splitting_error)?;
        if !report.overall {
            warn!("{}: parameter conditions violated; running anyway", alg.name());
            eprintln!("{report}");
        }
    }
    Ok(())
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32, CliError> {
    let gamma = a.gamma.unwrap_or(a.gamma_scale * a.eta);
    let beta = averaging_constant(gamma, a.eta);
    let rho = a.rho.unwrap_or(0.7 / beta);
    let params = InertialParams::new(a.theta, a.delta, rho, gamma, a.eta);
    println!(
        "theta={} delta={} rho={} gamma={} eta={} beta={} beta_rho={}",
        a.theta,
        a.delta,
        rho,
        gamma,
        a.eta,
        beta,
        beta * rho
    );
    match validate(&params) {
        Ok(report) => {
            println!("{report}");
            Ok(if report.overall { EXIT_OK } else { EXIT_CONDITIONS })
        }
        Err(e) => {
            println!("structural error: {e}");
            Ok(EXIT_STRUCTURAL)
        }
    }
}

pub fn cmd_gen(a: &GenArgs) -> Result<i32, CliError> {
    let is_scad = a.kind == KindArg::Scad;
    let m = a.m.unwrap_or(if is_scad { 200 } else { 50 });
    let n = a.n.unwrap_or(if is_scad { 1000 } else { 200 });
    let reg = a.reg.unwrap_or(DEFAULT_LASSO_REG);
    let inst = match a.kind {
        KindArg::Lasso => gen_lasso(m, n, a.seed.unwrap_or(1), a.density, reg),
        KindArg::Scad => gen_scad_with(m, n, a.seed.unwrap_or(1), !a.unplanted),
        KindArg::ThreeOp => gen_three_op(m, n, a.seed.unwrap_or(1), a.density, reg),
        KindArg::Deblur => {
            let img = load_image(&a.image)?;
            let reg = a.reg.unwrap_or(DEFAULT_DEBLUR_REG);
            gen_deblur(&img, a.image.ksize, a.image.sigma, a.seed.unwrap_or(1), a.image.noise, reg)
        }
        KindArg::Feas2d => gen_feas2d(a.angle.to_radians(), a.seed.unwrap_or(0)),
    }
    .map_err(problem_error)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::cant_create(format!("{}: {e}", dir.display())))?;
    }
    save_instance(&inst, &a.out).map_err(|e| CliError::cant_create(format!("{}: {e}", a.out.display())))?;
    let (rows, cols) = inst.dims();
    info!("wrote {} instance {rows}x{cols} to {}", inst.kind.name(), a.out.display());
    Ok(EXIT_OK)
}

/// A finished run with the quantities printed in summaries.
struct Outcome {
    record: RunRecord,
    objective: Option<f64>,
    snr: Option<f64>,
}

fn snr_reference(inst: &ProblemInstance) -> Option<Vector> {
    inst.x_true.clone().filter(|x| x.norm() > 0.0)
}

fn execute(
    inst: &ProblemInstance,
    built: &BuiltProblem,
    alg: &Algorithm,
    stop: StopRule,
    ledger: bool,
) -> Result<Outcome, CliError> {
    let init = inst.initial_state();
    let setup = match (ledger, alg.inertial_params()) {
        (true, Some(params)) => {
            let reference_stop = StopRule {
                eps: 1e-13,
                max_iters: (10 * stop.max_iters).max(100_000),
            };
            let reference = run(alg, &built.problem, init.clone(), reference_stop, RunOptions::default())
                .map_err(splitting_error)?;
            info!("reference run: {} iterations ({})", reference.iterations, reference.termination);
            Some(LedgerSetup::new(&built.problem, reference.final_point().clone(), params).map_err(splitting_error)?)
        }
        (true, None) => {
            warn!("{} has no inertial parameters; ledger columns left empty", alg.name());
            None
        }
        _ => None,
    };
    let has_objective = inst.kind != ProblemKind::Feas2d;
    let opts = RunOptions {
        objective: has_objective.then(|| {
            Box::new(move |x: &Vector| inst.objective(x).unwrap_or(f64::NAN)) as Box<dyn Fn(&Vector) -> f64 + '_>
        }),
        snr_reference: snr_reference(inst),
        ledger: setup,
        observer: None,
    };
    let record = run(alg, &built.problem, init, stop, opts).map_err(splitting_error)?;
    let x = record.final_point();
    let objective = inst.objective(x);
    let snr = snr_reference(inst).and_then(|r| snr_db(&r, x).ok());
    info!(
        "{}: {} after {} iterations in {:.3} s",
        record.algorithm, record.termination, record.iterations, record.elapsed_s
    );
    Ok(Outcome { record, objective, snr })
}

fn prepare(inst: &ProblemInstance, kind: AlgorithmKind, params: &ParamArgs) -> Result<(BuiltProblem, Algorithm), CliError> {
    let built = inst.build().map_err(problem_error)?;
    built.problem.check_applicable(kind).map_err(splitting_error)?;
    let alg = inst.algorithm(&built, kind, overrides(params));
    if let Some(p) = alg.inertial_params() {
        p.check_structure().map_err(splitting_error)?;
    }
    surface_conditions(&alg)?;
    Ok((built, alg))
}

fn stop_rule(s: &StopArgs) -> Result<StopRule, CliError> {
    if !(s.eps >= 0.0) {
        return Err(CliError::usage(format!("--eps must be nonnegative, got {}", s.eps)));
    }
    Ok(StopRule {
        eps: s.eps,
        max_iters: s.max_iters,
    })
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32, CliError> {
    let kind = parse_alg(&a.alg)?;
    let stop = stop_rule(&a.stop)?;
    let inst = load(&a.instance)?;
    let (built, alg) = prepare(&inst, kind, &a.params)?;
    let out = execute(&inst, &built, &alg, stop, a.ledger)?;
    let path = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    write_records(&path, &out.record)?;
    let mut line = format!(
        "{},{},{:.6},{}",
        kind.name(),
        out.record.iterations,
        out.record.elapsed_s,
        out.objective.map(fmt_num).unwrap_or_default()
    );
    if let Some(snr) = out.snr {
        line.push_str(&format!(",{}", fmt_num(snr)));
    }
    println!("{line}");
    Ok(termination_code(out.record.termination))
}

pub fn cmd_compare(a: &CompareArgs) -> Result<i32, CliError> {
    let mut kinds = Vec::new();
    let mut seen = HashSet::new();
    for name in &a.alg {
        let kind = parse_alg(name)?;
        if seen.insert(kind) {
            kinds.push(kind);
        } else {
            warn!("duplicate algorithm {name:?} ignored");
        }
    }
    if kinds.len() < 2 {
        return Err(CliError::usage(format!(
            "compare needs at least two distinct algorithms, got {}",
            kinds.len()
        )));
    }
    let stop = stop_rule(&a.stop)?;
    let inst = load(&a.instance)?;
    let prepared = kinds
        .iter()
        .map(|&k| prepare(&inst, k, &a.params).map(|p| (k, p)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for (kind, (built, alg)) in &prepared {
        let out = execute(&inst, built, alg, stop, false)?;
        write_records(&a.out.join(format!("{}.csv", kind.name())), &out.record)?;
        let metric = match inst.kind {
            ProblemKind::Deblur => out.snr,
            ProblemKind::Feas2d => Some(out.record.final_point().norm()),
            _ => out.objective,
        };
        code = code.max(termination_code(out.record.termination));
        rows.push(format!(
            "{},{},{:.6},{}",
            kind.name(),
            out.record.iterations,
            out.record.elapsed_s,
            metric.map(fmt_num).unwrap_or_default()
        ));
    }
    let summary = format!("alg,iters,elapsed_s,final_metric\n{}\n", rows.join("\n"));
    let path = a.out.join("summary.csv");
    let mut f = create(&path)?;
    f.write_all(summary.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| CliError::cant_create(format!("{}: {e}", path.display())))?;
    print!("{summary}");
    Ok(code)
}

pub fn cmd_deblur(a: &DeblurArgs) -> Result<i32, CliError> {
    let kind = parse_alg(&a.alg)?;
    let img = load_image(&a.image)?;
    let inst = gen_deblur(&img, a.image.ksize, a.image.sigma, a.seed, a.image.noise, a.reg).map_err(problem_error)?;
    let (built, alg) = prepare(&inst, kind, &a.params)?;
    let stop = StopRule {
        eps: 0.0,
        max_iters: a.iters,
    };
    let out = execute(&inst, &built, &alg, stop, false)?;
    let restored = GrayImage::from_vector(img.height, img.width, out.record.final_point())
        .map_err(|e| CliError::data(e.to_string()))?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::cant_create(format!("{}: {e}", dir.display())))?;
    }
    restored
        .write_pgm(&a.out, PgmEncoding::Binary)
        .map_err(|e| CliError::cant_create(format!("{}: {e}", a.out.display())))?;
    write_records(&a.out.with_extension("csv"), &out.record)?;
    println!(
        "{},{},{:.6},{},{}",
        kind.name(),
        out.record.iterations,
        out.record.elapsed_s,
        out.objective.map(fmt_num).unwrap_or_default(),
        out.snr.map(fmt_num).unwrap_or_default()
    );
    Ok(match out.record.termination {
        Termination::Divergence => EXIT_DIVERGENCE,
        _ => EXIT_OK,
    })
}
