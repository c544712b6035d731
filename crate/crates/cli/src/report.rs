//! JSON report documents. The layout is documented in
//! `docs/report.schema.json`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use schwlab_core::criteria::Certificate;
use schwlab_core::verify::SuiteReport;
use schwlab_core::{Jet3, NormReport, SamplingSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    pub point: Option<Complex64>,
}

impl From<&schwlab_core::Error> for ErrorInfo {
    fn from(e: &schwlab_core::Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
            point: e.point(),
        }
    }
}

/// One evaluated point of `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRow {
    pub z: Complex64,
    pub h: Option<Jet3>,
    pub g: Option<Jet3>,
    /// `(ω, ω', ω'', 0)`.
    pub omega: Option<Jet3>,
    pub schwarzian: Option<Complex64>,
    /// `|S_f| (1 - |z|^2)^2`.
    pub weighted: Option<f64>,
    pub jacobian: Option<f64>,
    pub error: Option<ErrorInfo>,
}

/// Scalars of the lens-map demo; the underlying reports sit in
/// [`ReportDocument::norms`] and the verdict in
/// [`ReportDocument::certificates`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensSummary {
    pub alpha: f64,
    pub t: f64,
    pub delta: f64,
    pub omega_star: f64,
    pub schwarzian_norm: f64,
    pub sup_dilatation: f64,
    pub sup_dilatation_boundary_degenerate: bool,
    pub omega_second: f64,
    /// `omega_second / omega_star`, a sampled stand-in for the constant in
    /// the second-order dilatation bound.
    pub empirical_k2: f64,
    /// `empirical_k2 * alpha`.
    pub bound_linear_term: f64,
    /// `1.5 alpha^2`.
    pub bound_quadratic_term: f64,
    pub schwarzian_within_bound: bool,
    pub qc_verdict: schwlab_core::criteria::Verdict,
}

/// Bookkeeping of a `mesh` run; the mesh itself is written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSummary {
    pub output: String,
    pub n_radii: usize,
    pub n_angles: usize,
    pub r_max: f64,
    pub rows: usize,
    pub failed_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    /// Echo of the map spec and the flags that shaped the run.
    pub input: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub sampling: Option<SamplingSpec>,
    pub norms: Vec<NormReport>,
    pub certificates: Vec<Certificate>,
    pub rows: Vec<EvalRow>,
    pub suites: Vec<SuiteReport>,
    pub lens: Option<LensSummary>,
    pub mesh: Option<MeshSummary>,
    pub error: Option<ErrorInfo>,
    pub exit_code: i32,
    pub timing_ms: f64,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input: BTreeMap::new(),
            seed: None,
            sampling: None,
            norms: Vec::new(),
            certificates: Vec::new(),
            rows: Vec::new(),
            suites: Vec::new(),
            lens: None,
            mesh: None,
            error: None,
            exit_code: 0,
            timing_ms: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers and string keys")
    }

    /// Parse a report, rejecting unknown fields and other schema versions.
    pub fn from_json(s: &str) -> Result<Self, String> {
        let doc: Self = serde_json::from_str(s).map_err(|e| e.to_string())?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            ));
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use schwlab_core::criteria::nehari_check;
    use schwlab_core::AnalyticMap;

    #[test]
    fn round_trip_is_lossless() {
        let mut doc = ReportDocument::new("norm");
        doc.input.insert("spec".into(), "h=koebe()".into());
        doc.sampling = Some(SamplingSpec::default());
        doc.seed = Some(42);
        doc.certificates.push(nehari_check(&AnalyticMap::koebe(), &SamplingSpec::default()).unwrap());
        doc.norms = doc.certificates[0].norms.clone();
        doc.rows.push(EvalRow {
            z: Complex64::new(0.1, 0.7),
            h: Some(Jet3::from_reals([0.1, 1.0 / 3.0, 2.0f64.sqrt(), -1e-300])),
            g: None,
            omega: None,
            schwarzian: Some(Complex64::new(-6.0, 1e-17)),
            weighted: Some(std::f64::consts::PI),
            jacobian: None,
            error: Some(ErrorInfo {
                kind: "x".into(),
                message: "y".into(),
                point: None,
            }),
        });
        doc.timing_ms = 12.345678901234567;
        let back = ReportDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), doc.to_json());
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        let doc = ReportDocument::new("eval");
        let mut v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(ReportDocument::from_json(&v.to_string()).unwrap_err().contains("unknown field"));
        let mut v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        v["schema_version"] = serde_json::json!(2);
        assert!(ReportDocument::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        v["sampling"] = serde_json::json!({"n_radii": 4, "bogus": 1});
        assert!(ReportDocument::from_json(&v.to_string()).is_err());
    }
}
