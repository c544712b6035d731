//! The subcommands as library functions. Each returns a finished
//! [`ReportDocument`] whose `exit_code` the binary passes on.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use schwlab_core::criteria::{self, FamilySpec, ShearOptions, Verdict};
use schwlab_core::norm::{self, FunctionalRegistry};
use schwlab_core::schwarzian;
use schwlab_core::verify::SuiteRegistry;
use schwlab_core::{AnalyticMap, HarmonicMap, SamplingSpec};

use crate::report::{ErrorInfo, EvalRow, LensSummary, MeshSummary, ReportDocument};
use crate::spec::{MapSpec, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_EVAL: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

fn started(command: &str) -> (ReportDocument, Instant) {
    (ReportDocument::new(command), Instant::now())
}

fn finish(mut doc: ReportDocument, t0: Instant) -> ReportDocument {
    doc.timing_ms = t0.elapsed().as_secs_f64() * 1e3;
    doc
}

fn fail(mut doc: ReportDocument, t0: Instant, code: i32, error: ErrorInfo) -> ReportDocument {
    doc.exit_code = code;
    doc.error = Some(error);
    finish(doc, t0)
}

fn parse_error(kind: &str, message: String) -> ErrorInfo {
    ErrorInfo {
        kind: kind.to_string(),
        message,
        point: None,
    }
}

fn core_error(doc: ReportDocument, t0: Instant, e: &schwlab_core::Error) -> ReportDocument {
    fail(doc, t0, EXIT_EVAL, ErrorInfo::from(e))
}

/// Parse and build a map, or produce the failing document.
fn load(doc: &mut ReportDocument, spec: &str) -> Result<HarmonicMap, (i32, ErrorInfo)> {
    doc.input.insert("spec".into(), spec.to_string());
    match MapSpec::parse(spec).map_err(SpecError::from).and_then(|s| s.harmonic()) {
        Ok(f) => Ok(f),
        Err(SpecError::Parse(e)) => Err((EXIT_PARSE, parse_error("ParseError", e.to_string()))),
        Err(SpecError::Eval { directive, source }) => {
            let mut info = ErrorInfo::from(&source);
            info.message = format!("while applying {directive}: {}", info.message);
            Err((EXIT_EVAL, info))
        }
    }
}

macro_rules! load_or_return {
    ($doc:ident, $t0:ident, $spec:expr) => {
        match load(&mut $doc, $spec) {
            Ok(f) => f,
            Err((code, info)) => return fail($doc, $t0, code, info),
        }
    };
}

fn eval_row(f: &HarmonicMap, z: Complex64) -> EvalRow {
    let mut row = EvalRow {
        z,
        h: None,
        g: None,
        omega: None,
        schwarzian: None,
        weighted: None,
        jacobian: None,
        error: None,
    };
    let run = |row: &mut EvalRow| -> schwlab_core::Result<()> {
        row.h = Some(f.h.eval(z)?);
        row.g = Some(f.g.eval(z)?);
        row.omega = Some(f.dilatation_jet(z)?);
        row.jacobian = Some(f.jacobian(z)?);
        let s = schwarzian::schwarzian_harmonic(f, z)?;
        row.schwarzian = Some(s);
        row.weighted = Some(schwarzian::weighted_magnitude(s, z));
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.error = Some(ErrorInfo::from(&e.at(z)));
    }
    row
}

/// Jets, dilatation, Jacobian and Schwarzian at each point.
pub fn cmd_eval(spec: &str, points: &[Complex64]) -> ReportDocument {
    let (mut doc, t0) = started("eval");
    let f = load_or_return!(doc, t0, spec);
    doc.rows = points.par_iter().map(|&z| eval_row(&f, z)).collect();
    if let Some(e) = doc.rows.iter().find_map(|r| r.error.clone()) {
        return fail(doc, t0, EXIT_EVAL, e);
    }
    finish(doc, t0)
}

/// Sup-norm estimate of a named functional of the map.
pub fn cmd_norm(spec: &str, which: &str, sampling: &SamplingSpec) -> ReportDocument {
    let (mut doc, t0) = started("norm");
    doc.input.insert("functional".into(), which.to_string());
    doc.sampling = Some(*sampling);
    let registry = FunctionalRegistry::builtin();
    if registry.description(which).is_none() {
        let names: Vec<_> = registry.names().collect();
        return fail(
            doc,
            t0,
            EXIT_PARSE,
            parse_error("ParseError", format!("unknown functional {which:?}; expected one of {}", names.join(", "))),
        );
    }
    let f = load_or_return!(doc, t0, spec);
    let functional = registry.build(which, &f).expect("name checked above");
    match norm::estimate(functional.as_ref(), sampling) {
        Ok(rep) => doc.norms.push(rep),
        Err(e) => return core_error(doc, t0, &e),
    }
    finish(doc, t0)
}

/// Run one property suite, or all of them for `suite == "all"`.
pub fn cmd_verify(suite: &str, seed: u64, n_cases: Option<usize>) -> ReportDocument {
    let (mut doc, t0) = started("verify");
    doc.input.insert("suite".into(), suite.to_string());
    if let Some(n) = n_cases {
        doc.input.insert("n_cases".into(), n.to_string());
    }
    doc.seed = Some(seed);
    let registry = SuiteRegistry::builtin();
    let names: Vec<&str> = if suite == "all" {
        registry.names().collect()
    } else if registry.get(suite).is_some() {
        vec![suite]
    } else {
        let known: Vec<_> = registry.names().collect();
        return fail(
            doc,
            t0,
            EXIT_PARSE,
            parse_error("ParseError", format!("unknown suite {suite:?}; expected all or one of {}", known.join(", "))),
        );
    };
    for name in names {
        doc.suites.push(registry.run(name, seed, n_cases).expect("suite name checked"));
    }
    if doc.suites.iter().any(|s| !s.passed) {
        doc.exit_code = EXIT_REFUTED;
    }
    finish(doc, t0)
}

/// `f = z + conj(g)` with `g' = ℓ_α`: the hyperbolic norm of the dilatation,
/// the Schwarzian norm against its bound, and the quasiconformal-extension
/// check whose dilatation hypothesis this map violates.
pub fn cmd_lens_demo(alpha: f64, t: f64, delta: f64, sampling: &SamplingSpec) -> ReportDocument {
    let (mut doc, t0) = started("lens-demo");
    doc.input.insert("alpha".into(), alpha.to_string());
    doc.input.insert("t".into(), t.to_string());
    doc.input.insert("delta".into(), delta.to_string());
    doc.sampling = Some(*sampling);
    let run = |doc: &mut ReportDocument| -> schwlab_core::Result<()> {
        if !(t > 0.0 && t < 1.0) {
            return Err(schwlab_core::Error::InvalidT(t));
        }
        let lens = AnalyticMap::lens(alpha)?;
        let f = HarmonicMap::from_co_analytic_derivative(AnalyticMap::identity(), lens);
        let omega = f.dilatation();
        let star = norm::estimate_omega_star_norm(&omega, sampling)?;
        let second = norm::estimate_omega_second_functional(&omega, sampling)?;
        let qc = criteria::qc_extension_check(&f, delta, t, sampling)?;
        let schwarz = qc
            .norms
            .iter()
            .find(|r| r.functional == "schwarzian")
            .cloned()
            .expect("qc check records the Schwarzian norm");
        let sup = qc
            .norms
            .iter()
            .find(|r| r.functional == "omega_sup")
            .cloned()
            .expect("qc check records the dilatation sup");
        let k2 = second.estimate / star.estimate;
        let linear = k2 * alpha;
        let quadratic = 1.5 * alpha * alpha;
        let schwarz_value = schwarz.lower_bound.max(schwarz.estimate);
        doc.lens = Some(LensSummary {
            alpha,
            t,
            delta,
            omega_star: star.estimate,
            schwarzian_norm: schwarz_value,
            sup_dilatation: sup.estimate,
            sup_dilatation_boundary_degenerate: sup.boundary_degenerate,
            omega_second: second.estimate,
            empirical_k2: k2,
            bound_linear_term: linear,
            bound_quadratic_term: quadratic,
            schwarzian_within_bound: schwarz_value <= (linear + quadratic) * (1.0 + sampling.rel_tol),
            qc_verdict: qc.verdict,
        });
        doc.norms = vec![star, second, schwarz, sup];
        doc.certificates.push(qc);
        Ok(())
    };
    if let Err(e) = run(&mut doc) {
        return core_error(doc, t0, &e);
    }
    finish(doc, t0)
}

pub const MESH_HEADER: [&str; 8] = ["r", "theta", "re_z", "im_z", "re_f", "im_f", "jacobian", "error"];

/// Write `f` on a uniform polar grid (`r = r_max k/(n_radii-1)`,
/// `θ = 2πj/n_angles`) as CSV. Failed nodes keep their coordinates, leave
/// the value columns empty and fill `error`.
pub fn cmd_mesh<W: Write>(
    spec: &str,
    n_radii: usize,
    n_angles: usize,
    r_max: f64,
    output_name: &str,
    out: W,
) -> ReportDocument {
    let (mut doc, t0) = started("mesh");
    doc.input.insert("output".into(), output_name.to_string());
    if n_radii < 2 || n_angles < 1 || !(r_max > 0.0 && r_max < 1.0) {
        return fail(
            doc,
            t0,
            EXIT_PARSE,
            parse_error(
                "InvalidSampling",
                format!("mesh needs n_radii >= 2, n_angles >= 1 and 0 < r_max < 1 (got {n_radii}, {n_angles}, {r_max})"),
            ),
        );
    }
    let f = load_or_return!(doc, t0, spec);
    let nodes: Vec<(f64, f64)> = (0..n_radii)
        .flat_map(|k| {
            let r = r_max * k as f64 / (n_radii - 1) as f64;
            (0..n_angles).map(move |j| (r, std::f64::consts::TAU * j as f64 / n_angles as f64))
        })
        .collect();
    let values: Vec<Result<(Complex64, f64), schwlab_core::Error>> = nodes
        .par_iter()
        .map(|&(r, th)| {
            let z = Complex64::from_polar(r, th);
            Ok((f.value(z)?, f.jacobian(z)?))
        })
        .collect();
    let mut writer = csv::Writer::from_writer(out);
    let mut failed = 0;
    let mut write = || -> csv::Result<()> {
        writer.write_record(MESH_HEADER)?;
        for (&(r, th), v) in nodes.iter().zip(&values) {
            let z = Complex64::from_polar(r, th);
            let mut rec = vec![r.to_string(), th.to_string(), z.re.to_string(), z.im.to_string()];
            match v {
                Ok((w, j)) => rec.extend([w.re.to_string(), w.im.to_string(), j.to_string(), String::new()]),
                Err(e) => {
                    failed += 1;
                    rec.extend([String::new(), String::new(), String::new(), e.to_string()]);
                }
            }
            writer.write_record(&rec)?;
        }
        writer.flush()?;
        Ok(())
    };
    if let Err(e) = write() {
        return fail(doc, t0, EXIT_EVAL, parse_error("Io", e.to_string()));
    }
    doc.mesh = Some(MeshSummary {
        output: output_name.to_string(),
        n_radii,
        n_angles,
        r_max,
        rows: nodes.len(),
        failed_rows: failed,
    });
    if failed > 0 {
        let first = values.iter().find_map(|v| v.as_ref().err()).expect("failed > 0");
        return fail(doc, t0, EXIT_EVAL, ErrorInfo::from(first));
    }
    finish(doc, t0)
}

/// Which criterion `check` runs, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    /// Nehari on the analytic part `h`.
    Nehari,
    Univalence { delta: f64, shear: bool },
    QcExtension { delta: f64, t: f64 },
    Family(FamilySpec),
    Injectivity { n_points: usize, seed: u64 },
}

/// Run a criterion on a spec. A refuted verdict exits with 1.
pub fn cmd_check(spec: &str, kind: &CheckKind, sampling: &SamplingSpec) -> ReportDocument {
    let (mut doc, t0) = started("check");
    doc.input.insert("criterion".into(), format!("{kind:?}"));
    let f = load_or_return!(doc, t0, spec);
    let cert = match kind {
        CheckKind::Nehari => criteria::nehari_check(&f.h, sampling),
        CheckKind::Univalence { delta, shear } => {
            criteria::harmonic_univalence_check(&f, *delta, sampling, shear.then(ShearOptions::default))
        }
        CheckKind::QcExtension { delta, t } => criteria::qc_extension_check(&f, *delta, *t, sampling),
        CheckKind::Family(fam) => criteria::family_membership(&f, fam, sampling),
        CheckKind::Injectivity { n_points, seed } => {
            doc.seed = Some(*seed);
            criteria::injectivity_sample(&f, *n_points, *seed)
        }
    };
    if !matches!(kind, CheckKind::Injectivity { .. }) {
        doc.sampling = Some(*sampling);
    }
    match cert {
        Ok(c) => {
            if c.verdict == Verdict::Refuted {
                doc.exit_code = EXIT_REFUTED;
            }
            doc.certificates.push(c);
        }
        Err(e) => return core_error(doc, t0, &e),
    }
    finish(doc, t0)
}
