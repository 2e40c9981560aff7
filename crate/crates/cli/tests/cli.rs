use std::path::Path;
use std::process::Command;

use lathom_cli::config::RunConfig;
use lathom_cli::output::plot_data;
use lathom_cli::{main_with, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK};

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("lathom").chain(args.iter().copied()))
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const NN: &str =
    "threads = 2\n[potential]\nfamily = \"pair\"\npreset = \"nn\"\ndim = 2\ncodim = 1\n[check]\nsamples = 100\n";
const CHAIN: &str = "threads = 1\n[potential]\nfamily = \"pair\"\npreset = \"two-spring\"\n";

#[test]
fn check_on_nn_quadratic_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "nn.toml", NN);
    let out = dir.path().join("out");
    assert_eq!(run(&["check", "--config", &cfg, "--out", out.to_str().unwrap()]), EXIT_OK);
    let report = json(&out.join("check.json"));
    let entries = report["report"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 9);
    assert!(entries.iter().all(|e| e["status"] == "pass"));
    assert!(std::fs::read_to_string(out.join("check.txt")).unwrap().contains("H3"));
}

#[test]
fn check_on_raw_lj_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lj.toml",
        "threads = 2\n[potential]\nfamily = \"lj\"\ndim = 2\nk = 3\nraw = true\n[check]\nsamples = 100\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["check", "--config", &cfg, "--out", out.to_str().unwrap()]), EXIT_CHECK_FAILED);
}

#[test]
fn degenerate_cell_reports_affine_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CHAIN);
    let out = dir.path().join("out");
    let code = run(&[
        "cell",
        "--config",
        &cfg,
        "--m",
        "-1",
        "--side",
        "4",
        "--layer",
        "3",
        "--dump-field",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let r = json(&out.join("cell.json"));
    assert_eq!(r["F_L"], r["affine_F_L"]);
    assert_eq!(r["note"], "no free sites");
    let field = std::fs::read_to_string(out.join("cell_field.csv")).unwrap();
    assert_eq!(field.lines().count(), 6);
    assert!(field.starts_with("k0,u0\n-2,"));
}

#[test]
fn malformed_tables_exit_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[potential]\nfamily = \"pair\"\ntable = [\n  { j = [0], xi = [1], value = 1.0 },\n  { j = [0], xi = [2], valeu = 0.5 },\n]\n",
    );
    assert_eq!(run(&["cell", "--config", &cfg, "--m", "1", "--side", "8"]), EXIT_CONFIG);
    let text = std::fs::read_to_string(&cfg).unwrap();
    let err = RunConfig::from_toml(&text, Path::new("bad.toml")).unwrap_err();
    assert_eq!((err.line, err.column), (Some(5), Some(24)));

    write(dir.path(), "t.csv", "j,xi,value\n0,1,1.0\n0,x,2.0\n");
    let cfg = write(dir.path(), "csv.toml", "[potential]\nfamily = \"pair\"\ntable_csv = \"t.csv\"\n");
    assert_eq!(run(&["cell", "--config", &cfg, "--m", "1", "--side", "8"]), EXIT_CONFIG);
    let err = lathom_cli::config::read_table_csv(&dir.path().join("t.csv")).unwrap_err();
    assert_eq!((err.line, err.column), (Some(3), Some(3)));
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.toml", "[fhom]\nm = [1.0]\nschedul = [8]\n");
    assert_eq!(run(&["fhom", "--config", &cfg]), EXIT_CONFIG);
    let cfg = write(dir.path(), "c.toml", CHAIN);
    assert_eq!(run(&["fhom", "--config", &cfg, "--m", "1", "--schedule", "7,16"]), EXIT_CONFIG);
    assert_eq!(run(&["fhom", "--config", &cfg, "--m", "1,2", "--schedule", "8"]), EXIT_CONFIG);
    assert_eq!(run(&["cell", "--config", &cfg, "--m", "1", "--side", "8", "--layer", "wide"]), EXIT_CONFIG);
    assert_eq!(run(&["bogus"]), EXIT_CONFIG);
}

#[test]
fn embedded_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CHAIN);
    let out = dir.path().join("out");
    assert_eq!(
        run(&["fhom", "--config", &cfg, "--m", "0.5", "--schedule", "8,16,32", "--out", out.to_str().unwrap()]),
        EXIT_OK
    );
    let doc = json(&out.join("fhom.json"));
    let parsed: RunConfig = serde_json::from_value(doc["config"].clone()).unwrap();
    assert_eq!(parsed.fhom.schedule, Some(vec![8, 16, 32]));
    assert_eq!(parsed.output.as_deref(), Some(out.as_path()));
    let again: RunConfig = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(again, parsed);
    let text = toml::to_string(&parsed).unwrap();
    assert_eq!(RunConfig::from_toml(&text, Path::new("x.toml")).unwrap(), parsed);
}

#[test]
fn sweep_resumes_and_writes_plot_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write(dir.path(), "s.toml", &format!("{CHAIN}[sweep]\ngrid = [[0.0], [1.0], [-1.0]]\nschedule = [8, 16]\n"));
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["sweep", "--config", &cfg, "--out", o]), EXIT_OK);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let record = std::fs::read_to_string(out.join("sweep.jsonl")).unwrap();
    assert_eq!(record.lines().count(), 3);
    assert_eq!(run(&["sweep", "--config", &cfg, "--out", o]), EXIT_OK);
    assert_eq!(std::fs::read_to_string(out.join("sweep.jsonl")).unwrap(), record);
    assert_eq!(std::fs::read_to_string(out.join("sweep.csv")).unwrap(), csv);
    let curves = std::fs::read_to_string(out.join("sweep_curves.dat")).unwrap();
    assert_eq!(curves.matches("# M = ").count(), 3);
    assert!(curves.starts_with("# L F_L\n"));
}

#[test]
fn empty_plot_data_is_header_only() {
    assert_eq!(plot_data(&["L", "F_L"], &[]), "# L F_L\n");
}

#[test]
fn thread_count_does_not_change_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[potential]\nfamily = \"pair\"\npreset = \"nn\"\ndim = 2\n");
    let mut outputs = Vec::new();
    for t in ["1", "4"] {
        let out = dir.path().join(format!("out{t}"));
        let code = run(&[
            "fhom",
            "--config",
            &cfg,
            "--m",
            "0.6,-0.3",
            "--schedule",
            "8,16,32",
            "--threads",
            t,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        outputs.push(std::fs::read(out.join("fhom.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.toml",
        "[potential]\nfamily = \"pair\"\npreset = \"two-spring\"\n[solver]\nmethod = \"iterative\"\nmax_iter = 1\n",
    );
    let bin = env!("CARGO_BIN_EXE_lathom");
    let out = dir.path().join("out");
    let status = Command::new(bin)
        .args(["cell", "--config", &cfg, "--m", "1", "--side", "16", "--out", out.to_str().unwrap()])
        .env("LATHOM_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_NOT_CONVERGED));
    let status = Command::new(bin)
        .args(["lj-margin", "--kmax", "10", "--out", out.to_str().unwrap()])
        .env("LATHOM_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_CONFIG));
    let output =
        Command::new(bin).args(["lj-margin", "--kmax", "10", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(output.status.code(), Some(EXIT_OK));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("K,margin\n2,1.6934326171875000e1\n"));
    assert!(std::fs::read_to_string(out.join("lj_margin.dat")).unwrap().starts_with("# K margin\n"));
}
