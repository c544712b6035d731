//! Command-line front end for `schwlab-core`: map specifications, JSON
//! reports, CSV meshes and the lens-map demo.

pub mod commands;
pub mod report;
pub mod spec;

pub use commands::{cmd_check, cmd_eval, cmd_lens_demo, cmd_mesh, cmd_norm, cmd_verify, CheckKind};
pub use report::ReportDocument;
pub use spec::{parse_complex, parse_map, MapSpec, ParseError, SpecError};

/// Environment variable capping the worker count; `0` or unset means one
/// worker per core.
pub const THREADS_ENV: &str = "SCHWLAB_THREADS";

/// Size the global rayon pool from the value of [`THREADS_ENV`].
pub fn configure_threads(value: Option<&str>) -> Result<usize, String> {
    let n = match value.map(str::trim) {
        None | Some("") => 0,
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))?,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(rayon::current_num_threads())
}
