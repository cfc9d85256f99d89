//! Command-line front end: `mesh`, `solve`, `study`, `timing` and `verify`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assembly::ElementKind;
use crate::bench::problems::ProblemSpec;
use crate::bench::solve::{self, SolveOptions};
use crate::bench::study::{self, MeshFamily, StudyConfig};
use crate::bench::timing::{self, TimingConfig};
use crate::bench::verify;
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dssy", version, about = "DSSY nonconforming quadrilateral elements: meshes, solves and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mesh and write it in the quadmesh text format.
    Mesh(MeshArgs),
    /// Solve one problem on one mesh and report errors.
    Solve(SolveArgs),
    /// Convergence table over a sequence of meshes.
    Study(StudyArgs),
    /// Time the nonparametric element against the condensed parametric one.
    Timing(TimingArgs),
    /// Run the property checks.
    Verify,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshKind {
    Theta,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProblemArg {
    Poisson,
    Stokes,
    Elasticity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ElementArg {
    Np,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Args, Debug)]
struct MeshArgs {
    #[arg(long, value_enum, default_value = "theta")]
    kind: MeshKind,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 0.7)]
    theta: f64,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long = "mesh", value_enum, default_value = "theta")]
    mesh: MeshKind,
    #[arg(long, default_value_t = 0.7)]
    theta: f64,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl FamilyArgs {
    fn family(&self) -> MeshFamily {
        match self.mesh {
            MeshKind::Theta => MeshFamily::Theta { theta: self.theta },
            MeshKind::Random => MeshFamily::Random {
                alpha: self.alpha,
                seed: self.seed,
            },
        }
    }
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "poisson")]
    problem: ProblemArg,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_enum, default_value = "np")]
    element: ElementArg,
    /// Free parameter of the nonparametric element.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ctilde: f64,
    /// Variant of the parametric reference function (1 or 2).
    #[arg(long, default_value_t = 1)]
    l: i32,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Gauss points per direction for assembly.
    #[arg(long, default_value_t = 5)]
    quad: usize,
    /// Relative residual tolerance (default 1e-12, or 1e-10 for saddle-point systems).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl ProblemArgs {
    fn problem(&self) -> Result<ProblemSpec> {
        match self.problem {
            ProblemArg::Poisson => Ok(ProblemSpec::poisson()),
            ProblemArg::Stokes => Ok(ProblemSpec::stokes()),
            ProblemArg::Elasticity => ProblemSpec::elasticity(self.mu, self.lambda),
        }
    }

    fn element(&self) -> Result<ElementKind> {
        match self.element {
            ElementArg::Np => {
                if !self.ctilde.is_finite() {
                    return Err(Error::BadParam(format!("ctilde must be finite, got {}", self.ctilde)));
                }
                Ok(ElementKind::nonparametric(self.ctilde))
            }
            ElementArg::P => {
                if !(1..=2).contains(&self.l) {
                    return Err(Error::BadVariant(self.l));
                }
                Ok(ElementKind::Parametric {
                    variant_l: self.l,
                    augmented: true,
                })
            }
        }
    }

    fn solve_options(&self) -> Result<SolveOptions> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::BadParam(format!("tol must be in (0, 1), got {tol}")));
            }
        }
        Ok(SolveOptions {
            quad_npts: self.quad,
            tol: self.tol,
            ..SolveOptions::default()
        })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: ProblemArgs,
    #[arg(long, default_value_t = 16)]
    n: usize,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[command(flatten)]
    common: ProblemArgs,
    /// Cells per direction at each level.
    #[arg(long, value_delimiter = ',', default_values_t = study::DEFAULT_LEVELS)]
    levels: Vec<usize>,
}

#[derive(Args, Debug)]
struct TimingArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
    levels: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for an error: invalid parameters count as bad flags.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BadParam(_) | Error::BadVariant(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Mesh(a) => {
            let family = match a.kind {
                MeshKind::Theta => MeshFamily::Theta { theta: a.theta },
                MeshKind::Random => MeshFamily::Random {
                    alpha: a.alpha,
                    seed: a.seed,
                },
            };
            let mesh = family.build(a.n)?;
            emit(&a.out, &mesh.to_text())?;
            if a.out.is_some() {
                println!("nodes={} cells={} edges={}", mesh.nodes.len(), mesh.n_cells(), mesh.edges.len());
            }
            Ok(EXIT_OK)
        }
        Command::Solve(a) => {
            let c = &a.common;
            let (problem, kind, opts) = (c.problem()?, c.element()?, c.solve_options()?);
            let mesh = c.family.family().build(a.n)?;
            let sol = solve::solve(&mesh, kind, &problem, opts)?;
            let m = study::measure(&mesh, &sol, &problem)?;
            let (l1, l2) = study::column_labels(&problem);
            println!("dofs={}", m.dof);
            println!("iterations={} residual={:.3e}", sol.iterations, sol.residual);
            println!("err_l2={}  # {l1}", study::format_exp(m.primary, 4));
            println!("err_h1={}  # {l2}", study::format_exp(m.secondary, 4));
            if let Some(out) = &c.out {
                let rows = study::rows_from(&[a.n], &[m]);
                let text = match c.format {
                    Format::Csv => study::to_csv(&rows),
                    Format::Md => study::to_markdown(&rows, &problem),
                };
                std::fs::write(out, text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Study(a) => {
            let c = &a.common;
            if a.levels.is_empty() {
                return Err(Error::BadParam("at least one level is required".into()));
            }
            let mut config = StudyConfig::new(c.problem()?, c.family.family(), c.element()?).with_levels(&a.levels);
            config.solve = c.solve_options()?;
            let streaming = c.out.is_none() && c.format == Format::Csv;
            if streaming {
                println!("{}", study::CSV_HEADER);
            }
            let rows = study::convergence_study_with(&config, |row| {
                if streaming {
                    println!("{}", study::csv_row(row));
                } else {
                    eprintln!("h=1/{} done", row.n);
                }
            })?;
            if !streaming {
                let text = match c.format {
                    Format::Csv => study::to_csv(&rows),
                    Format::Md => study::to_markdown(&rows, &config.problem),
                };
                emit(&c.out, &text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Timing(a) => {
            if a.runs == 0 || a.levels.is_empty() {
                return Err(Error::BadParam("timing needs at least one run and one level".into()));
            }
            let mut config = TimingConfig::new(a.family.family(), &a.levels);
            config.runs = a.runs;
            let rows = timing::timing_ratio(&config)?;
            let text = match a.format {
                Format::Csv => timing::to_csv(&rows),
                Format::Md => timing::to_markdown(&rows),
            };
            emit(&a.out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let reports = verify::run_all();
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} checks, {failed} failed", reports.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}
