use std::process::{Command, Output};

use schwlab::ReportDocument;

fn schwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schwlab"))
        .args(args)
        .env_remove("SCHWLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("not killed by a signal")
}

fn report(args: &[&str]) -> (i32, ReportDocument) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--json", p]);
    let out = schwlab(&full);
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.to_json().trim(), text.trim(), "re-serialization differs");
    (code(&out), doc)
}

#[test]
fn eval_reports_the_koebe_schwarzian() {
    let (c, doc) = report(&["eval", "h=koebe(); g=0", "--at", "0.5", "--at", "-0.2+0.3i"]);
    assert_eq!(c, 0);
    assert_eq!(doc.schema_version, 1);
    let s = doc.rows[0].schwarzian.unwrap();
    // -6 / (1 - z^2)^2 at z = 1/2
    assert!((s.re + 6.0 / 0.5625).abs() < 1e-12 && s.im.abs() < 1e-12);
    assert!((doc.rows[0].weighted.unwrap() - 6.0).abs() < 1e-12);
}

#[test]
fn norm_json_to_stdout_parses() {
    let out = schwlab(&["norm", "h=koebe()", "--json", "-"]);
    assert_eq!(code(&out), 0);
    let doc = ReportDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!((doc.norms[0].estimate - 6.0).abs() < 1e-3);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&schwlab(&["check", "h=z; g=0.2z", "--criterion", "nehari"])), 0);
    let (c, doc) = report(&["check", "h=z^2; g=0", "--criterion", "injectivity", "--points", "2000"]);
    assert_eq!(c, 1);
    assert!(doc.certificates[0].witness_partner.is_some());
    assert_eq!(code(&schwlab(&["eval", "h=log(z)", "--at", "0"])), 2);
    assert_eq!(code(&schwlab(&["eval", "h=z+*", "--at", "0"])), 3);
    assert_eq!(code(&schwlab(&["bogus"])), 3);
    assert_eq!(code(&schwlab(&["--help"])), 0);
}

#[test]
fn parse_errors_name_the_column() {
    let out = schwlab(&["eval", "h=z+)", "--at", "0.1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
}

#[test]
fn lens_demo_reports_a_degenerate_dilatation() {
    let (c, doc) = report(&["lens-demo", "--alpha", "0.25"]);
    assert_eq!(c, 0);
    let l = doc.lens.unwrap();
    assert!(l.sup_dilatation_boundary_degenerate);
    assert!(l.schwarzian_within_bound);
    assert!((l.omega_star - 0.25).abs() < 1e-3);
}

#[test]
fn verify_is_seeded() {
    let (c1, a) = report(&["verify", "chain_rule", "--cases", "40", "--seed", "9"]);
    let (c2, b) = report(&["verify", "chain_rule", "--cases", "40", "--seed", "9"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a.suites, b.suites);
    assert_eq!(code(&schwlab(&["verify", "no_such_suite"])), 3);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_schwlab"))
            .args(["norm", "h=z+0.1z^2; g=0.05z^2", "--json", "-"])
            .env("SCHWLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        ReportDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap().norms
    };
    assert_eq!(run("1"), run("0"));
    let bad = Command::new(env!("CARGO_BIN_EXE_schwlab"))
        .args(["norm", "h=z"])
        .env("SCHWLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 3);
}

#[test]
fn mesh_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.csv");
    let out = schwlab(&["mesh", "h=z; g=0.5z", "--radii", "3", "--angles", "4", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["r", "theta", "re_z", "im_z", "re_f", "im_f", "jacobian", "error"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        let x: f64 = row[2].parse().unwrap();
        let re_f: f64 = row[4].parse().unwrap();
        // f = z + 0.5 conj(z) has real part 1.5 x
        assert!((re_f - 1.5 * x).abs() < 1e-12);
        assert!((row[6].parse::<f64>().unwrap() - 0.75).abs() < 1e-12);
    }
}
