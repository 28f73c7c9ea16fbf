//! Command-line frontend: parse matrices, points and polynomials, dispatch
//! to the library, emit JSON reports and CSV point clouds.
//!
//! Exit codes: 0 success or pass, 2 parse error, 3 negative verdict,
//! 4 inconclusive, 5 precondition failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use tetra_core::fundops::{
    check_e_isometry, check_e_unitary, check_pure, check_sufficiency, extract_fundamental,
    OperatorTriple, Sufficiency,
};
use tetra_core::geometry::{
    beta_decompose, classify_tetra, gamma_classify, gamma_lift_check, kernel_check, GammaPoint,
    Semantics, TetraPoint,
};
use tetra_core::io::{
    cloud_to_csv, cloud_to_json, complex_to_json, matrix_to_json, model_to_json, parse_point,
    read_matrix,
};
use tetra_core::jointspec::{joint_eigenvalues, verify_commuting};
use tetra_core::linalg::ComplexMatrix;
use tetra_core::model::{
    build_model, compress_to_comodel, dilation_pipeline, verify_model_identity,
};
use tetra_core::variety::{
    check_bde_criterion, classify_distinguished, default_x3_circles, sample_variety,
    DistinguishedVerdict, VarietyParams,
};
use tetra_core::vn::{parse_complex_str, verify_vn, Poly3, VnError};
use tetra_core::Tolerance;

#[derive(Parser)]
#[command(name = "tetra", version, about = "Tetrablock geometry and operator-model toolkit")]
struct Cli {
    /// Absolute tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_abs: f64,
    /// Relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_rel: f64,
    /// Boundary-band half width for region classification.
    #[arg(long, global = true, default_value_t = 1e-9)]
    band: f64,
    /// Seed for randomized steps (env TETRA_SEED overrides).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for parallel sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a point against the tetrablock.
    Classify(ClassifyArgs),
    /// Minimum modulus of 1 - z x1 - w x2 + z w x3 on the torus grid.
    KernelCheck(KernelArgs),
    /// Classify a point of the symmetrized bidisc, or check the circle
    /// lift of a tetrablock point.
    Gamma(GammaArgs),
    /// Joint eigenvalues of a commuting pair.
    JointEigs(JointArgs),
    /// Fundamental operators of a commuting triple plus class predicates.
    Fundops(FundopsArgs),
    /// Sample the variety of a parameter pair and classify it.
    Variety(VarietyArgs),
    /// Build the truncated Hardy-space model triple.
    Model(ModelArgs),
    /// Verify the dilation monomials and the model identity.
    DilationCheck(DilationArgs),
    /// von Neumann inequality verifier over the boundary variety.
    Vn(VnArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Point as three comma-separated complex numbers, e.g. "0.5,0.25i,0".
    #[arg(long)]
    point: String,
    /// Use closed (closure) membership semantics.
    #[arg(long)]
    closed: bool,
    /// Torus grid for the kernel cross-check.
    #[arg(long, default_value_t = 64)]
    kernel_grid: usize,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    point: String,
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Detection threshold on the minimum modulus (defaults to tol-abs).
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct GammaArgs {
    /// Gamma point "s,p".
    #[arg(long, conflicts_with = "lift")]
    point: Option<String>,
    /// Tetrablock point for the circle-lift membership check.
    #[arg(long)]
    lift: Option<String>,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long)]
    closed: bool,
}

#[derive(Args)]
struct JointArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct FundopsArgs {
    #[arg(long)]
    t1: PathBuf,
    #[arg(long)]
    t2: PathBuf,
    #[arg(long)]
    t3: PathBuf,
    /// Circle grid for the radius sweep.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args)]
struct VarietyArgs {
    #[arg(long)]
    a1: PathBuf,
    #[arg(long)]
    a2: PathBuf,
    #[arg(long, default_value_t = 256)]
    boundary_angles: usize,
    #[arg(long, default_value_t = 64)]
    interior_angles: usize,
    /// Interior samples stay below |x3| <= 1 - delta.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Circle grid for the sup-norm hypothesis report.
    #[arg(long, default_value_t = 256)]
    sup_grid: usize,
    /// Write the sampled cloud as CSV.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Write the verdict report as JSON.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Also run the bD_E boundary criterion.
    #[arg(long)]
    bde: bool,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, requires = "a2")]
    a1: Option<PathBuf>,
    #[arg(long)]
    a2: Option<PathBuf>,
    /// Scalar parameter shorthand (order 1), e.g. --a 0.5 --b 0.5.
    #[arg(long, conflicts_with = "a1")]
    a: Option<String>,
    #[arg(long, conflicts_with = "a2")]
    b: Option<String>,
    /// Fiber order sanity check for the scalar shorthand.
    #[arg(long)]
    n: Option<usize>,
    /// Number of Hardy modes.
    #[arg(long = "N", alias = "modes", default_value_t = 8)]
    modes: usize,
    /// Compress to the leading m modes and report the triple.
    #[arg(long)]
    compress: Option<usize>,
    /// Prefix for emitted triple files (<prefix>.t1.json etc.).
    #[arg(long)]
    emit_triple: Option<String>,
    /// Write the model JSON here instead of stdout only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DilationArgs {
    #[arg(long)]
    t1: PathBuf,
    #[arg(long)]
    t2: PathBuf,
    #[arg(long)]
    t3: PathBuf,
    #[arg(long = "N", alias = "modes", default_value_t = 16)]
    modes: usize,
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    #[arg(long, default_value_t = 1e-9)]
    tail_tol: f64,
    /// Also check W W* + M M* = I on the leading modes.
    #[arg(long)]
    model_identity: bool,
    /// Top modes excluded from the model-identity window.
    #[arg(long, default_value_t = 8)]
    buffer: usize,
}

#[derive(Args)]
struct VnArgs {
    #[arg(long, requires_all = ["t2", "t3"])]
    t1: Option<PathBuf>,
    #[arg(long)]
    t2: Option<PathBuf>,
    #[arg(long)]
    t3: Option<PathBuf>,
    /// Build the test triple from parameters instead of files.
    #[arg(long, requires = "a2", conflicts_with = "t1")]
    a1: Option<PathBuf>,
    #[arg(long)]
    a2: Option<PathBuf>,
    #[arg(long = "N", alias = "modes", default_value_t = 8)]
    modes: usize,
    #[arg(long, default_value_t = 4)]
    compress: usize,
    /// Polynomial file, one per line, '#' comments.
    #[arg(long)]
    polys: Option<PathBuf>,
    /// Generate this many seeded random polynomials of degree <= 3.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 2048)]
    boundary_angles: usize,
}

/// Errors carrying their process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Failure { code: 2, message: msg.into() }
    }

    fn precondition(msg: impl Into<String>) -> Self {
        Failure { code: 5, message: msg.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let seed = std::env::var("TETRA_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(cli.seed);
    let tol = Tolerance::new(cli.tol_abs, cli.tol_rel);
    let band = cli.band;
    let result = match &cli.cmd {
        Cmd::Classify(args) => cmd_classify(args, band, &tol),
        Cmd::KernelCheck(args) => cmd_kernel(args, &tol),
        Cmd::Gamma(args) => cmd_gamma(args, band),
        Cmd::JointEigs(args) => cmd_joint_eigs(args, seed, &tol),
        Cmd::Fundops(args) => cmd_fundops(args, &tol),
        Cmd::Variety(args) => cmd_variety(args, seed, band, &tol),
        Cmd::Model(args) => cmd_model(args, &tol),
        Cmd::DilationCheck(args) => cmd_dilation(args, &tol),
        Cmd::Vn(args) => cmd_vn(args, seed, band, &tol),
    };
    match result {
        Ok((value, code)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn point_arg(s: &str) -> Result<TetraPoint, Failure> {
    parse_point(s).map_err(|e| Failure::parse(e.to_string()))
}

fn matrix_arg(path: &std::path::Path) -> Result<ComplexMatrix, Failure> {
    read_matrix(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn point_json(pt: &TetraPoint) -> Value {
    json!([complex_to_json(pt.x1), complex_to_json(pt.x2), complex_to_json(pt.x3)])
}

fn cmd_classify(args: &ClassifyArgs, band: f64, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let pt = point_arg(&args.point)?;
    let semantics = if args.closed { Semantics::Closed } else { Semantics::Open };
    let tag = classify_tetra(&pt, band, semantics);
    let beta = beta_decompose(&pt, band).ok();
    let (_, kernel_min) = kernel_check(&pt, args.kernel_grid, tol.abs);
    Ok((
        json!({
            "point": point_json(&pt),
            "tag": tag.as_str(),
            "beta": beta.map(|b| json!([complex_to_json(b.beta1), complex_to_json(b.beta2)])),
            "beta_modulus_sum": beta.map(|b| b.modulus_sum()),
            "kernel_min": kernel_min,
        }),
        0,
    ))
}

fn cmd_kernel(args: &KernelArgs, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let pt = point_arg(&args.point)?;
    let threshold = args.threshold.unwrap_or(tol.abs);
    let (ok, min) = kernel_check(&pt, args.grid, threshold);
    Ok((
        json!({
            "point": point_json(&pt),
            "nonvanishing": ok,
            "min_modulus": min,
            "grid": args.grid,
            "threshold": threshold,
        }),
        0,
    ))
}

fn cmd_gamma(args: &GammaArgs, band: f64) -> Result<(Value, u8), Failure> {
    let semantics = if args.closed { Semantics::Closed } else { Semantics::Open };
    if let Some(lift) = &args.lift {
        let pt = point_arg(lift)?;
        let ok = gamma_lift_check(&pt, args.samples, band);
        return Ok((
            json!({
                "point": point_json(&pt),
                "lift_in_gamma": ok,
                "samples": args.samples,
            }),
            0,
        ));
    }
    let literal = args.point.as_ref().ok_or_else(|| Failure::parse("need --point or --lift"))?;
    let parts: Vec<&str> = literal.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::parse("gamma point wants \"s,p\""));
    }
    let s = parse_complex_str(parts[0]).ok_or_else(|| Failure::parse("bad s component"))?;
    let p = parse_complex_str(parts[1]).ok_or_else(|| Failure::parse("bad p component"))?;
    let tag = gamma_classify(&GammaPoint::new(s, p), band, semantics);
    Ok((
        json!({
            "s": complex_to_json(s),
            "p": complex_to_json(p),
            "tag": tag.as_str(),
        }),
        0,
    ))
}

fn cmd_joint_eigs(args: &JointArgs, seed: u64, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let a = matrix_arg(&args.a)?;
    let b = matrix_arg(&args.b)?;
    let pair = verify_commuting(&a, &b, tol).map_err(|e| Failure::precondition(e.to_string()))?;
    let spectrum =
        joint_eigenvalues(&pair, seed, tol).map_err(|e| Failure::precondition(e.to_string()))?;
    let mut rows: Vec<(Complex64, Complex64, f64)> = spectrum
        .pairs
        .iter()
        .zip(&spectrum.residuals)
        .map(|(&(l, m), &r)| (l, m, r))
        .collect();
    rows.sort_by(|x, y| {
        [x.0.re, x.0.im, x.1.re, x.1.im].partial_cmp(&[y.0.re, y.0.im, y.1.re, y.1.im]).unwrap()
    });
    Ok((
        json!({
            "commutation_residual": pair.residual,
            "pairs": rows
                .iter()
                .map(|(l, m, r)| json!({
                    "lambda": complex_to_json(*l),
                    "mu": complex_to_json(*m),
                    "residual": r,
                }))
                .collect::<Vec<_>>(),
        }),
        0,
    ))
}

fn cmd_fundops(args: &FundopsArgs, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let t1 = matrix_arg(&args.t1)?;
    let t2 = matrix_arg(&args.t2)?;
    let t3 = matrix_arg(&args.t3)?;
    let tr = OperatorTriple::new(t1, t2, t3, tol)
        .map_err(|e| Failure::precondition(e.to_string()))?;
    let fp = extract_fundamental(&tr, tol).map_err(|e| Failure::precondition(e.to_string()))?;
    let sufficiency = check_sufficiency(&tr, &fp, args.grid, tol);
    let verdict = match sufficiency.verdict {
        Sufficiency::Certified => "certified-E-contraction",
        Sufficiency::NotAContraction => "not-a-contraction",
        Sufficiency::Inconclusive => "inconclusive",
    };
    Ok((
        json!({
            "defect_rank": fp.a1.order(),
            "a1": matrix_to_json(&fp.a1),
            "a2": matrix_to_json(&fp.a2),
            "equation_residuals": [fp.residual1, fp.residual2],
            "sufficiency": {
                "verdict": verdict,
                "commutator_norm": sufficiency.commutator_norm,
                "selfcommutator_defect": sufficiency.selfcommutator_defect,
                "radius_sweep": sufficiency.radius,
                "norms": sufficiency.norms,
            },
            "e_isometry": check_e_isometry(&tr, tol),
            "e_unitary": check_e_unitary(&tr, tol),
            "pure_t3": check_pure(&tr.t3, 64, tol),
        }),
        0,
    ))
}

fn cmd_variety(
    args: &VarietyArgs,
    seed: u64,
    band: f64,
    tol: &Tolerance,
) -> Result<(Value, u8), Failure> {
    let a1 = matrix_arg(&args.a1)?;
    let a2 = matrix_arg(&args.a2)?;
    let vp = VarietyParams::new(&a1, &a2, args.sup_grid, tol)
        .map_err(|e| Failure::precondition(e.to_string()))?;
    let report = classify_distinguished(
        &vp,
        args.boundary_angles,
        args.interior_angles,
        args.delta,
        seed,
        band,
        tol,
    );
    if let Some(path) = &args.out_csv {
        let full_cloud = sample_variety(
            &vp,
            &default_x3_circles(args.interior_angles.max(16)),
            seed,
            band,
            tol,
        );
        std::fs::write(path, cloud_to_csv(&full_cloud))
            .map_err(|e| Failure::precondition(e.to_string()))?;
    }
    let mut body = json!({
        "verdict": report.verdict.as_str(),
        "sup_norm": report.sup_norm,
        "hypothesis": {
            "commutator_norm": vp.commutator_norm,
            "selfcommutator_defect": vp.selfcommutator_defect,
        },
        "boundary_points": report.boundary_cloud.len(),
        "interior_points": report.interior_cloud.len(),
        "boundary_cloud": cloud_to_json(&report.boundary_cloud),
    });
    let code = match &report.verdict {
        DistinguishedVerdict::Distinguished | DistinguishedVerdict::DistinguishedEmpirical => 0,
        DistinguishedVerdict::NotDistinguished { witness } => {
            body["witness"] = json!({
                "x1": complex_to_json(witness.x1),
                "x2": complex_to_json(witness.x2),
                "x3": complex_to_json(witness.x3),
                "tag": witness.tag.as_str(),
            });
            3
        }
        DistinguishedVerdict::Inconclusive { reason } => {
            body["reason"] = json!(reason);
            4
        }
        DistinguishedVerdict::HypothesisViolated { sup_norm } => {
            body["reason"] = json!(format!("sup-norm {sup_norm} above 1"));
            5
        }
    };
    if args.bde {
        let bde = check_bde_criterion(&vp, args.boundary_angles, seed, band, tol);
        body["bde"] = json!({
            "disjoint_from_bde": bde.disjoint_from_bde,
            "sup_norm_lt_1": bde.sup_norm_lt_1,
            "sup_norm": bde.sup_norm,
        });
    }
    if let Some(path) = &args.out_json {
        std::fs::write(path, serde_json::to_string_pretty(&body).expect("serializes"))
            .map_err(|e| Failure::precondition(e.to_string()))?;
    }
    Ok((body, code))
}

fn parse_scalar(which: &str, s: &str) -> Result<ComplexMatrix, Failure> {
    parse_complex_str(s)
        .map(ComplexMatrix::scalar)
        .ok_or_else(|| Failure::parse(format!("bad complex literal for --{which}: {s}")))
}

fn cmd_model(args: &ModelArgs, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let (a1, a2) = match (&args.a1, &args.a2, &args.a, &args.b) {
        (Some(p1), Some(p2), None, None) => (matrix_arg(p1)?, matrix_arg(p2)?),
        (None, None, Some(a), Some(b)) => {
            if let Some(n) = args.n {
                if n != 1 {
                    return Err(Failure::parse("scalar shorthand implies --n 1"));
                }
            }
            (parse_scalar("a", a)?, parse_scalar("b", b)?)
        }
        _ => return Err(Failure::parse("need either --a1/--a2 files or --a/--b scalars")),
    };
    let mt = build_model(&a1, &a2, args.modes, tol)
        .map_err(|e| Failure::precondition(e.to_string()))?;
    let mut body = model_to_json(&mt);
    if let Some(m) = args.compress {
        let tr = compress_to_comodel(&mt, m).map_err(|e| Failure::precondition(e.to_string()))?;
        body["compression"] = json!({
            "modes": m,
            "t1": matrix_to_json(&tr.t1),
            "t2": matrix_to_json(&tr.t2),
            "t3": matrix_to_json(&tr.t3),
        });
        if let Some(prefix) = &args.emit_triple {
            for (name, m) in [("t1", &tr.t1), ("t2", &tr.t2), ("t3", &tr.t3)] {
                let path = format!("{prefix}.{name}.json");
                std::fs::write(&path, serde_json::to_string_pretty(&matrix_to_json(m)).unwrap())
                    .map_err(|e| Failure::precondition(format!("{path}: {e}")))?;
            }
        }
    }
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&body).expect("serializes"))
            .map_err(|e| Failure::precondition(e.to_string()))?;
    }
    Ok((body, 0))
}

fn cmd_dilation(args: &DilationArgs, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let t1 = matrix_arg(&args.t1)?;
    let t2 = matrix_arg(&args.t2)?;
    let t3 = matrix_arg(&args.t3)?;
    let tr = OperatorTriple::new(t1, t2, t3, tol)
        .map_err(|e| Failure::precondition(e.to_string()))?;
    let (mt, _emb, report) =
        dilation_pipeline(&tr, args.modes, args.max_degree, args.tail_tol, tol)
            .map_err(|e| Failure::precondition(e.to_string()))?;
    let mut body = json!({
        "modes": args.modes,
        "fiber_dim": mt.space.fiber_dim,
        "tail": report.tail,
        "isometry_defect": report.isometry_defect,
        "intertwining": report.intertwining,
        "monomial_max": report.monomial_max,
        "monomials": report
            .monomials
            .iter()
            .map(|(m1, m2, n, r)| json!([m1, m2, n, r]))
            .collect::<Vec<_>>(),
    });
    if args.model_identity {
        let identity = verify_model_identity(&tr, args.modes, args.buffer, args.tail_tol, tol)
            .map_err(|e| Failure::precondition(e.to_string()))?;
        body["model_identity"] = json!({
            "residual": identity.residual,
            "tail": identity.tail,
            "window_modes": identity.window_modes,
        });
    }
    Ok((body, 0))
}

fn cmd_vn(args: &VnArgs, seed: u64, band: f64, tol: &Tolerance) -> Result<(Value, u8), Failure> {
    let tr = match (&args.t1, &args.t2, &args.t3, &args.a1, &args.a2) {
        (Some(p1), Some(p2), Some(p3), None, None) => {
            OperatorTriple::new(matrix_arg(p1)?, matrix_arg(p2)?, matrix_arg(p3)?, tol)
                .map_err(|e| Failure::precondition(e.to_string()))?
        }
        (None, None, None, Some(p1), Some(p2)) => {
            let mt = build_model(&matrix_arg(p1)?, &matrix_arg(p2)?, args.modes, tol)
                .map_err(|e| Failure::precondition(e.to_string()))?;
            compress_to_comodel(&mt, args.compress)
                .map_err(|e| Failure::precondition(e.to_string()))?
        }
        _ => return Err(Failure::parse("need --t1/--t2/--t3 files or --a1/--a2 parameters")),
    };
    let mut polys: Vec<Poly3> = Vec::new();
    if let Some(path) = &args.polys {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let p: Poly3 = line
                .parse()
                .map_err(|e: VnError| Failure::parse(format!("line {}: {e}", lineno + 1)))?;
            polys.push(p);
        }
    }
    if let Some(k) = args.random {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        polys.extend((0..k).map(|_| Poly3::random(&mut rng, 3)));
    }
    if polys.is_empty() {
        return Err(Failure::parse("no polynomials given; use --polys or --random"));
    }
    let report = verify_vn(&tr, &polys, args.boundary_angles, seed, band, tol)
        .map_err(|e| Failure::precondition(e.to_string()))?;
    let all_pass = report.all_pass();
    let body = json!({
        "seed": seed,
        "boundary_points": report.boundary_points,
        "hypothesis": {
            "fundamental_commutator": report.hypothesis.fundamental_commutator,
            "selfcommutator_defect": report.hypothesis.selfcommutator_defect,
            "pure_adjoint": report.hypothesis.pure_adjoint,
            "defect_rank": report.hypothesis.defect_rank,
        },
        "all_pass": all_pass,
        "polynomials": report
            .verdicts
            .iter()
            .map(|v| json!({
                "degree": v.degree,
                "lhs": v.lhs,
                "rhs": v.rhs,
                "margin": v.margin,
                "pass": v.pass,
                "argmax": point_json(&v.argmax),
            }))
            .collect::<Vec<_>>(),
    });
    Ok((body, if all_pass { 0 } else { 3 }))
}
