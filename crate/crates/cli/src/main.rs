use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use schwlab::commands::{self, CheckKind, EXIT_PARSE};
use schwlab::{parse_complex, ReportDocument};
use schwlab_core::criteria::FamilySpec;
use schwlab_core::SamplingSpec;

#[derive(Parser)]
#[command(name = "schwlab", version, about = "Schwarzian derivatives and univalence criteria for harmonic maps of the disk")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Number of radii of the coarse grid
    #[arg(long, global = true)]
    radii: Option<usize>,
    /// Number of angles of the coarse grid
    #[arg(long, global = true)]
    angles: Option<usize>,
    /// Outermost sampled radius
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Local refinement rounds
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Relative tolerance for convergence and extrapolation
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here (`-` for stdout)
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
}

impl Common {
    fn sampling(&self) -> SamplingSpec {
        let d = SamplingSpec::default();
        SamplingSpec {
            n_radii: self.radii.unwrap_or(d.n_radii),
            n_angles: self.angles.unwrap_or(d.n_angles),
            r_max: self.rmax.unwrap_or(d.r_max),
            refine_rounds: self.refine.unwrap_or(d.refine_rounds),
            refine_factor: d.refine_factor,
            rel_tol: self.tol.unwrap_or(d.rel_tol),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Functional {
    Schwarzian,
    OmegaStar,
    OmegaSecond,
    OmegaSup,
}

impl Functional {
    fn name(self) -> &'static str {
        match self {
            Functional::Schwarzian => "schwarzian",
            Functional::OmegaStar => "omega_star",
            Functional::OmegaSecond => "omega_second",
            Functional::OmegaSup => "omega_sup",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Nehari,
    Univalence,
    Qc,
    Family,
    Injectivity,
}

#[derive(Subcommand)]
enum Command {
    /// Jets, dilatation, Jacobian and Schwarzian at given points
    Eval {
        /// Map spec, e.g. "h=koebe(); g=0"
        spec: String,
        /// Evaluation point (repeatable), e.g. --at 0.5 --at "0.1+0.2i"
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Estimate a hyperbolic sup-norm
    Norm {
        spec: String,
        #[arg(long, value_enum, default_value = "schwarzian")]
        which: Functional,
    },
    /// Run a seeded property suite (or `all`)
    Verify {
        suite: String,
        /// Number of cases; each suite has its own default
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Lens-map example: small Schwarzian norm, dilatation reaching the circle
    LensDemo {
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        /// User supplied univalence constant (2 is the analytic value, not a proven one)
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
    },
    /// Write f on a polar grid as CSV
    Mesh {
        spec: String,
        /// CSV output path (`-` for stdout)
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run a univalence or extension criterion
    Check {
        spec: String,
        #[arg(long, value_enum)]
        criterion: Criterion,
        /// User supplied univalence constant (2 is the analytic value, not a proven one)
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        /// Family check: do not require h(0) = g(0) = 0, h'(0) = 1
        #[arg(long)]
        unnormalized: bool,
        /// Family check: also require g'(0) = 0
        #[arg(long)]
        zero_dilatation: bool,
        /// Univalence check: also run Nehari on sheared analytic parts
        #[arg(long)]
        shear: bool,
        /// Injectivity sample size
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
}

fn parse_points(raw: &[String]) -> Result<Vec<Complex64>, String> {
    raw.iter()
        .map(|s| parse_complex(s).map_err(|e| format!("--at {s:?}: {e}")))
        .collect()
}

fn open_output(path: &PathBuf) -> io::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn summary(doc: &ReportDocument) -> String {
    let mut out = String::new();
    for r in &doc.rows {
        match (&r.schwarzian, &r.error) {
            (Some(s), _) => out += &format!(
                "z = {}  S_f = {:.12e}{:+.12e}i  weighted = {:.12e}  J_f = {:.6e}\n",
                r.z,
                s.re,
                s.im,
                r.weighted.unwrap_or(f64::NAN),
                r.jacobian.unwrap_or(f64::NAN)
            ),
            (None, Some(e)) => out += &format!("z = {}  error: {}\n", r.z, e.message),
            _ => {}
        }
    }
    for n in &doc.norms {
        out += &format!(
            "{}: lower_bound = {:.10}  estimate = {:.10}  argmax = {}  converged = {}  samples = {}\n",
            n.functional, n.lower_bound, n.estimate, n.argmax, n.converged, n.samples_used
        );
    }
    for c in &doc.certificates {
        out += &format!(
            "{}: {:?}  measured = {:.10}  threshold = {}\n  caveat: {}\n",
            c.criterion, c.verdict, c.measured, c.threshold, c.caveat
        );
        if let (Some(a), Some(b)) = (c.witness, c.witness_partner) {
            out += &format!("  witness pair: {a}, {b}\n");
        } else if let Some(w) = c.witness {
            out += &format!("  witness: {w}\n");
        }
    }
    for s in &doc.suites {
        out += &format!(
            "{}: {}  checked = {}  rejected = {}  max_residual = {:.3e}  tol = {:.0e}\n",
            s.suite,
            if s.passed { "pass" } else { "FAIL" },
            s.checked,
            s.rejected,
            s.max_residual,
            s.tolerance
        );
        for f in s.failures.iter().take(5) {
            out += &format!("  case {} (seed {}): {}\n", f.case, f.seed, f.message);
        }
    }
    if let Some(l) = &doc.lens {
        out += &format!(
            "lens alpha = {}: ||w*|| = {:.6}  ||S_f|| = {:.6} <= {:.6} + {:.6} ({})  sup|w| boundary degenerate = {}  qc: {:?}\n",
            l.alpha,
            l.omega_star,
            l.schwarzian_norm,
            l.bound_linear_term,
            l.bound_quadratic_term,
            l.schwarzian_within_bound,
            l.sup_dilatation_boundary_degenerate,
            l.qc_verdict
        );
    }
    if let Some(m) = &doc.mesh {
        out += &format!("mesh: {} rows ({} failed) -> {}\n", m.rows, m.failed_rows, m.output);
    }
    out
}

fn run(cli: Cli) -> ReportDocument {
    let sampling = cli.common.sampling();
    match cli.command {
        Command::Eval { spec, at } => match parse_points(&at) {
            Ok(points) => commands::cmd_eval(&spec, &points),
            Err(msg) => usage_error("eval", msg),
        },
        Command::Norm { spec, which } => commands::cmd_norm(&spec, which.name(), &sampling),
        Command::Verify { suite, cases } => commands::cmd_verify(&suite, cli.common.seed, cases),
        Command::LensDemo { alpha, t, delta } => commands::cmd_lens_demo(alpha, t, delta, &sampling),
        Command::Mesh { spec, out } => {
            let name = out.display().to_string();
            match open_output(&out) {
                Ok(w) => commands::cmd_mesh(&spec, sampling.n_radii, sampling.n_angles, sampling.r_max, &name, w),
                Err(e) => {
                    let mut doc = ReportDocument::new("mesh");
                    doc.exit_code = commands::EXIT_EVAL;
                    doc.error = Some(schwlab::report::ErrorInfo {
                        kind: "Io".into(),
                        message: format!("{name}: {e}"),
                        point: None,
                    });
                    doc
                }
            }
        }
        Command::Check {
            spec,
            criterion,
            delta,
            t,
            lambda,
            unnormalized,
            zero_dilatation,
            shear,
            points,
        } => {
            let kind = match criterion {
                Criterion::Nehari => CheckKind::Nehari,
                Criterion::Univalence => CheckKind::Univalence { delta, shear },
                Criterion::Qc => CheckKind::QcExtension { delta, t },
                Criterion::Family => CheckKind::Family(FamilySpec {
                    lambda,
                    normalized: !unnormalized,
                    zero_dilatation_at_origin: zero_dilatation,
                }),
                Criterion::Injectivity => CheckKind::Injectivity {
                    n_points: points,
                    seed: cli.common.seed,
                },
            };
            commands::cmd_check(&spec, &kind, &sampling)
        }
    }
}

fn usage_error(command: &str, message: String) -> ReportDocument {
    let mut doc = ReportDocument::new(command);
    doc.exit_code = EXIT_PARSE;
    doc.error = Some(schwlab::report::ErrorInfo {
        kind: "ParseError".into(),
        message,
        point: None,
    });
    doc
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = schwlab::configure_threads(std::env::var(schwlab::THREADS_ENV).ok().as_deref()) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_PARSE as u8);
    }
    let json = cli.common.json.clone();
    let mesh_to_stdout = matches!(&cli.command, Command::Mesh { out, .. } if out.as_os_str() == "-");
    let doc = run(cli);

    let json_to_stdout = json.as_ref().is_some_and(|p| p.as_os_str() == "-");
    if !json_to_stdout && !mesh_to_stdout {
        print!("{}", summary(&doc));
    }
    if let Some(e) = &doc.error {
        match e.point {
            Some(p) => eprintln!("error ({}) at z = {p}: {}", e.kind, e.message),
            None => eprintln!("error ({}): {}", e.kind, e.message),
        }
    }
    if let Some(path) = json {
        let written = open_output(&path).and_then(|mut w| {
            w.write_all(doc.to_json().as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()
        });
        if let Err(e) = written {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(commands::EXIT_EVAL as u8);
        }
    }
    ExitCode::from(doc.exit_code as u8)
}
