//! Command-line front end for the Beltrami solver.
//!
//! Every subcommand builds a coefficient (or loads fields), runs one of the
//! library pipelines and writes CSV tables, optionally with SVG plots.
//! Identical configuration and seed produce byte-identical output files.
//!
//! Exit codes: 0 success, 1 an asserted inequality failed (the failing check
//! and row are printed), 2 configuration or input error, 3 the series stalled
//! and `--strict` was given.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use beltrami_core::coefficients::{CoefficientSpec, Family, RadialProfile};
use beltrami_core::elliptic::{self, MatrixField};
use beltrami_core::estimators;
use beltrami_core::factorization;
use beltrami_core::field::RealField;
use beltrami_core::io;
use beltrami_core::neumann::{self, NeumannRun, PrincipalSolution};
use beltrami_core::report::ReportTable;
use beltrami_core::{Error, Result, SpectralPlan};

#[derive(Parser)]
#[command(
    name = "beltrami",
    version,
    about = "Planar Beltrami equation solver with quantitative estimate checks",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve f_zbar = mu f_z and write the solution fields plus a summary
    Solve(SolveArgs),
    /// Tabulate Neumann term norms against the decay envelope
    Decay(DecayArgs),
    /// Weighted area-distortion curve of a radial family
    Area(AreaArgs),
    /// Gradient and Jacobian integrals off a shrinking neighborhood of the
    /// worst point (radial families) or over the disk (file coefficients)
    Regularity(RegularityArgs),
    /// Split the coefficient against a distortion budget and verify the
    /// factorization identities
    Factorize(FactorizeArgs),
    /// Check that (u, v) solve the conjugate A-harmonic system matching the
    /// Beltrami reduction of the matrix field
    EllipticCheck(EllipticArgs),
    /// Print the built-in coefficient family catalog
    Examples,
}

#[derive(Args)]
struct CoefficientArgs {
    /// Coefficient family: gp, alpha, stretch or file
    #[arg(long)]
    family: String,

    /// Exponent p with exp(distortion) integrable in L^p (gp family
    /// parameter; also the exponent used by estimate checks)
    #[arg(long)]
    p: Option<f64>,

    /// Growth rate of the alpha family
    #[arg(long)]
    alpha: Option<f64>,

    /// Constant dilatation of the stretch family, in (-1, 1)
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,

    /// Real part of the complex scale applied to the alpha profile
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    lambda_re: f64,

    /// Imaginary part of the complex scale applied to the alpha profile
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda_im: f64,

    /// CF1 coefficient file (family = file)
    #[arg(long)]
    file: Option<PathBuf>,

    /// Grid samples per side, a power of two in [64, 4096]
    #[arg(long, default_value_t = 256)]
    n: usize,

    /// Grid half width (the square is [-L, L]^2)
    #[arg(long = "L", default_value_t = 2.0)]
    l: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Write log-log SVG plots next to the CSV tables
    #[arg(long)]
    plot: bool,

    /// Seed reserved for randomized checks; part of the determinism contract
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Number of Neumann series terms
    #[arg(long, default_value_t = 40)]
    terms: usize,

    /// Exit with code 3 if the series stalls before the term budget
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Number of Neumann series terms (at least 16)
    #[arg(long, default_value_t = 64)]
    terms: usize,

    /// Envelope exponent: norms are compared with n^(-beta/2-1) log^(-1/2) n
    #[arg(long, default_value_t = 1.5)]
    beta: f64,

    /// Exit with code 3 if the series stalls before the term budget
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct AreaArgs {
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Weight exponent of log^beta(e + 1/r) against the image area
    #[arg(long)]
    beta: f64,

    /// Assert (not just report) growth of the weighted column when beta >= p
    #[arg(long)]
    strict_sharpness: bool,
}

#[derive(Args)]
struct RegularityArgs {
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Weight exponent of the log-weighted gradient and Jacobian integrals
    #[arg(long)]
    beta: f64,

    /// Series terms when solving a file coefficient on the grid
    #[arg(long, default_value_t = 40)]
    terms: usize,

    /// Assert (not just report) divergence of the sweep when beta >= p
    #[arg(long)]
    strict_sharpness: bool,
}

#[derive(Args)]
struct FactorizeArgs {
    #[command(flatten)]
    coefficient: CoefficientArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Pointwise distortion budget of the uniformly elliptic outer factor
    #[arg(long = "M", default_value_t = 3.0)]
    m: f64,
}

#[derive(Args)]
struct EllipticArgs {
    /// CF1 file with the (1,1) matrix entry in the real part
    #[arg(long)]
    a11: PathBuf,
    /// CF1 file with the off-diagonal matrix entry in the real part
    #[arg(long)]
    a12: PathBuf,
    /// CF1 file with the (2,2) matrix entry in the real part
    #[arg(long)]
    a22: PathBuf,
    /// CF1 file with the potential u in the real part
    #[arg(long)]
    u: PathBuf,
    /// CF1 file with the conjugate candidate v in the real part
    #[arg(long)]
    v: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

enum Outcome {
    Clean,
    InequalityFailed,
    NonConvergent,
}

fn main() -> ExitCode {
    if let Ok(value) = std::env::var("BELTRAMI_THREADS") {
        match value.parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("error: BELTRAMI_THREADS must be a positive integer, got {value:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::InequalityFailed) => ExitCode::from(1),
        Ok(Outcome::NonConvergent) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Decay(args) => cmd_decay(args),
        Command::Area(args) => cmd_area(args),
        Command::Regularity(args) => cmd_regularity(args),
        Command::Factorize(args) => cmd_factorize(args),
        Command::EllipticCheck(args) => cmd_elliptic_check(args),
        Command::Examples => {
            print_examples();
            Ok(Outcome::Clean)
        }
    }
}

fn build_spec(args: &CoefficientArgs) -> Result<CoefficientSpec> {
    // The grid constructor enforces the power-of-two lower bound; the upper
    // bound is a front-end budget so a typo cannot ask for a 100 GB plan.
    if args.n > 4096 {
        return Err(Error::Config(format!(
            "grid n = {} exceeds the supported maximum 4096",
            args.n
        )));
    }
    let family = match args.family.as_str() {
        "gp" => Family::Gp,
        "alpha" => Family::Alpha,
        "stretch" => Family::Stretch,
        "file" => Family::File,
        other => {
            return Err(Error::Config(format!(
                "unknown family {other:?}; expected gp, alpha, stretch or file"
            )))
        }
    };
    Ok(CoefficientSpec {
        family,
        p: args.p,
        alpha: args.alpha,
        lambda: Complex64::new(args.lambda_re, args.lambda_im),
        gamma: args.gamma,
        file: args.file.clone(),
        grid_n: args.n,
        grid_l: args.l,
    })
}

/// Radial profile of a closed-form family, without building the grid field.
fn build_profile(spec: &CoefficientSpec) -> Result<RadialProfile> {
    match spec.family {
        Family::Gp => RadialProfile::gp(require(spec.p, "gp", "--p")?),
        Family::Alpha => RadialProfile::alpha(require(spec.alpha, "alpha", "--alpha")?, spec.lambda),
        Family::Stretch => RadialProfile::stretch(require(spec.gamma, "stretch", "--gamma")?),
        Family::File => Err(Error::Config(
            "this command needs a radial family (gp, alpha or stretch)".into(),
        )),
    }
}

fn require(value: Option<f64>, family: &str, flag: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("family {family} requires {flag}")))
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_table(
    table: &ReportTable,
    dir: &Path,
    stem: &str,
    plot: Option<(&str, &[&str])>,
) -> Result<()> {
    let csv = dir.join(format!("{stem}.csv"));
    table.write_csv(&csv)?;
    println!("wrote {}", csv.display());
    if let Some((x, ys)) = plot {
        let svg = dir.join(format!("{stem}.svg"));
        table.write_svg(&svg, x, ys)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

/// Print failed asserted checks with the row each one refers to.
/// Returns true when anything failed.
fn announce_failures(table: &ReportTable, asserted: &[(&str, usize)]) -> bool {
    let mut failed = false;
    for (name, row) in asserted {
        if let Some(check) = table.checks().iter().find(|c| c.name == *name) {
            if !check.passed {
                println!(
                    "FAIL {} at row {}: measured {:.6e}, bound {:.6e}",
                    check.name, row, check.measured, check.bound
                );
                failed = true;
            }
        }
    }
    failed
}

/// Assert every check in the table, pointing at one row for all of them.
fn announce_all_failures(table: &ReportTable, row: usize) -> bool {
    let names: Vec<&str> = table.checks().iter().map(|c| c.name.as_str()).collect();
    let asserted: Vec<(&str, usize)> = names.into_iter().map(|n| (n, row)).collect();
    announce_failures(table, &asserted)
}

/// Index of the row maximizing `column`.
fn argmax_row(table: &ReportTable, column: usize) -> usize {
    let mut best = 0;
    for (i, row) in table.rows().iter().enumerate() {
        if row[column] > table.rows()[best][column] {
            best = i;
        }
    }
    best
}

/// Relative L2 error of the computed map against the radial closed form,
/// on the annulus 0.1 < |z| < 0.9 (clear of the origin and the rim).
fn closed_form_error(solution: &PrincipalSolution, profile: &RadialProfile) -> f64 {
    let map = solution.map();
    let grid = map.grid();
    let n = grid.n();
    let mut err = 0.0;
    let mut norm = 0.0;
    for i in 0..n {
        for j in 0..n {
            let z = grid.point(i, j);
            let t = z.norm();
            if t <= 0.1 || t >= 0.9 {
                continue;
            }
            let exact = z * (profile.rho(t) / t);
            err += (map.samples()[i * n + j] - exact).norm_sqr();
            norm += exact.norm_sqr();
        }
    }
    (err / norm).sqrt()
}

fn cmd_solve(args: SolveArgs) -> Result<Outcome> {
    if args.terms < 1 {
        return Err(Error::Config("solve needs --terms >= 1".into()));
    }
    let spec = build_spec(&args.coefficient)?;
    let (mu, profile) = spec.build()?;
    let plan = SpectralPlan::new(mu.grid());
    let solution = neumann::solve(&mu, &plan, args.terms)?;

    let dir = &args.output.out;
    ensure_out(dir)?;
    for (name, field) in [
        ("displacement.cf1", solution.displacement().clone()),
        ("fz.cf1", solution.fz().clone()),
        ("fzbar.cf1", solution.fzbar().clone()),
        ("jacobian.cf1", solution.jacobian().to_complex()),
    ] {
        let path = dir.join(name);
        io::write_field(&path, &field)?;
        println!("wrote {}", path.display());
    }

    let residual = solution.beltrami_residual(&mu)?;
    let mut summary = ReportTable::new(
        "principal solution summary",
        &["residual", "terms", "converged"],
    );
    summary.push_row(vec![
        residual,
        solution.terms_used() as f64,
        if solution.non_convergent() { 0.0 } else { 1.0 },
    ]);
    summary.add_meta("family", &args.coefficient.family);
    summary.add_meta("grid_n", spec.grid_n);
    summary.add_meta("grid_L", spec.grid_l);
    summary.add_meta("seed", args.output.seed);
    if let Some(profile) = &profile {
        summary.add_meta("closed_form_error", closed_form_error(&solution, profile));
    }
    summary.write_csv(&dir.join("summary.csv"))?;
    println!("wrote {}", dir.join("summary.csv").display());
    println!(
        "residual {residual:.3e} after {} terms{}",
        solution.terms_used(),
        if solution.non_convergent() {
            ", series stalled"
        } else {
            ""
        }
    );

    if solution.non_convergent() && args.strict {
        return Ok(Outcome::NonConvergent);
    }
    Ok(Outcome::Clean)
}

fn cmd_decay(args: DecayArgs) -> Result<Outcome> {
    if args.terms < 16 {
        return Err(Error::Config("decay needs --terms >= 16".into()));
    }
    let spec = build_spec(&args.coefficient)?;
    let (mu, _) = spec.build()?;
    let plan = SpectralPlan::new(mu.grid());
    let mut run = NeumannRun::new(mu, &plan)?;
    run.run_to(&plan, args.terms)?;
    let p = args.coefficient.p.unwrap_or(1.0);
    let table = neumann::decay_report(&run, args.beta, p)?;

    let dir = &args.output.out;
    ensure_out(dir)?;
    let plot = args.output.plot.then_some(("n", &["norm", "envelope"][..]));
    write_table(&table, dir, "decay", plot)?;
    if let Some(dhat) = table.meta_value("dhat") {
        println!("dhat = {dhat}");
    }

    if run.stalled() {
        println!("series stalled after {} terms", run.norms().len());
        if args.strict {
            return Ok(Outcome::NonConvergent);
        }
    }
    Ok(Outcome::Clean)
}

fn cmd_area(args: AreaArgs) -> Result<Outcome> {
    let spec = build_spec(&args.coefficient)?;
    let profile = build_profile(&spec)?;
    let p = args
        .coefficient
        .p
        .ok_or_else(|| Error::Config("area needs --p to fix the comparison exponent".into()))?;
    // Sweep r = 1e-4 down to 1e-12: deep enough that the log weight has
    // reached its asymptotic regime yet the image area is still resolvable
    // in double precision.
    let radii: Vec<f64> = (4..=12).map(|k| 10f64.powi(-k)).collect();
    let table = estimators::area_distortion_curve(&profile, &radii, args.beta, p)?;

    let dir = &args.output.out;
    ensure_out(dir)?;
    let plot = args
        .output
        .plot
        .then_some(("r", &["measure", "image", "weighted"][..]));
    write_table(&table, dir, "area", plot)?;

    let mut asserted: Vec<(&str, usize)> = Vec::new();
    if args.beta < p {
        asserted.push(("weighted_bounded", argmax_row(&table, 3)));
    } else if args.strict_sharpness {
        asserted.push(("weighted_growth", table.rows().len() - 1));
    }
    if announce_failures(&table, &asserted) {
        return Ok(Outcome::InequalityFailed);
    }
    Ok(Outcome::Clean)
}

fn cmd_regularity(args: RegularityArgs) -> Result<Outcome> {
    let spec = build_spec(&args.coefficient)?;
    let dir = &args.output.out;
    ensure_out(dir)?;

    if spec.family == Family::File {
        // No closed form to shrink against: solve on the grid and report the
        // disk integrals at the requested weight.
        let (mu, _) = spec.build()?;
        let plan = SpectralPlan::new(mu.grid());
        let solution = neumann::solve(&mu, &plan, args.terms)?;
        let table = estimators::regularity_grid(&solution, args.beta)?;
        write_table(&table, dir, "regularity", None)?;
        return Ok(Outcome::Clean);
    }

    let profile = build_profile(&spec)?;
    let p = args
        .coefficient
        .p
        .ok_or_else(|| Error::Config("regularity needs --p to fix the comparison exponent".into()))?;
    let table = estimators::regularity_sweep(&profile, args.beta, p)?;
    let plot = args
        .output
        .plot
        .then_some(("epsilon", &["gradient_integral", "jacobian_integral"][..]));
    write_table(&table, dir, "regularity", plot)?;

    let last = table.rows().len() - 1;
    let mut asserted: Vec<(&str, usize)> = Vec::new();
    if args.beta < p {
        asserted.push(("epsilon_sweep_converged", last));
    } else if args.strict_sharpness {
        asserted.push(("epsilon_sweep_diverged", last));
    }
    if announce_failures(&table, &asserted) {
        return Ok(Outcome::InequalityFailed);
    }
    Ok(Outcome::Clean)
}

fn cmd_factorize(args: FactorizeArgs) -> Result<Outcome> {
    if !(args.m > 1.0) {
        return Err(Error::Config(format!(
            "distortion budget M = {} must exceed 1",
            args.m
        )));
    }
    let spec = build_spec(&args.coefficient)?;
    let (mu, _) = spec.build()?;
    let split = factorization::hyperbolic_split(&mu, args.m)?;
    let table = factorization::violation_report(&split, &mu)?;

    let dir = &args.output.out;
    ensure_out(dir)?;
    write_table(&table, dir, "factorize", None)?;
    let mut failed = announce_all_failures(&table, 0);

    if let Some(p) = args.coefficient.p {
        let exp_table = factorization::exp_bound_check(&split, p)?;
        write_table(&exp_table, dir, "factorize_exp", None)?;
        failed |= announce_all_failures(&exp_table, 0);
    }

    if failed {
        return Ok(Outcome::InequalityFailed);
    }
    Ok(Outcome::Clean)
}

fn real_part(path: &Path) -> Result<RealField> {
    let field = io::read_field(path)?;
    let samples = field.samples().iter().map(|c| c.re).collect();
    RealField::from_samples(field.grid(), samples)
}

fn cmd_elliptic_check(args: EllipticArgs) -> Result<Outcome> {
    let a = MatrixField::new(
        real_part(&args.a11)?,
        real_part(&args.a12)?,
        real_part(&args.a22)?,
    )?;
    let u = real_part(&args.u)?;
    let v = real_part(&args.v)?;
    let table = elliptic::conjugate_relation_check(&u, &v, &a)?;

    let dir = &args.output.out;
    ensure_out(dir)?;
    write_table(&table, dir, "elliptic", None)?;
    if announce_all_failures(&table, 0) {
        return Ok(Outcome::InequalityFailed);
    }
    Ok(Outcome::Clean)
}

fn print_examples() {
    println!(
        "\
Built-in coefficient families:

  stretch  --gamma G     constant dilatation G in (-1, 1); the principal map
                         is z |z|^a with a = (1+G)/(1-G), uniformly elliptic
  gp       --p P         borderline family whose distortion K(z) grows like
                         log(1/|z|) near the origin with exp(K) in L^p; the
                         profile is log(e+1/t)^(-P/2) loglog-corrected and
                         normalized to fix the unit circle
  alpha    --alpha A     profile exp(-A/2 log^2 ...) scaled by --lambda-re /
                         --lambda-im; distortion grows too fast for the
                         exponential class, so decay checks degrade
  file     --file PATH   arbitrary coefficient read from a CF1 field file;
                         values are clamped to |mu| <= 1 - 1e-12

Common flags: --n (power of two in [64, 4096], default 256), --L (half
width, default 2), --out, --plot, --seed.

File formats: CF1 = 16-byte header (magic, n, L) + n^2 complex samples,
row-major little-endian doubles. Tables are CSV with # meta and # check
footer lines; --plot adds log-log SVG renderings."
    );
}
