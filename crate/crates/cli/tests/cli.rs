use std::path::Path;
use std::process::{Command, Output};

fn mcvqe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcvqe"))
        .args(args)
        .env("MCVQE_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value following `key = ` in a summary line.
fn field(text: &str, key: &str) -> f64 {
    let tail = &text[text.find(&format!("{key} = ")).unwrap_or_else(|| panic!("{key} missing in {text}")) + key.len() + 3..];
    tail.split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn singles_pool_on_psh_returns_hartree_fock() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcvqe(dir.path(), &["run", "--system", "psh", "--ansatz", "ucc:t1e,t1p", "--mode", "analytic"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!((field(&out, "E_UCC") - field(&out, "E_HF")).abs() < 1e-6, "{out}");
}

#[test]
fn invalid_label_is_a_config_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcvqe(dir.path(), &["run", "--ansatz", "ucc:t1e,t4q"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t4q"));
    let o = mcvqe(dir.path(), &["fci", "--system", "h2o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("system"));
}

#[test]
fn numerical_failure_exits_three_and_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "system = \"psh\"\n[scf]\nmax_iter = 1\n").unwrap();
    let o = mcvqe(dir.path(), &["fci", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`scf`"));
}

#[test]
fn lucj_run_writes_artifacts_that_reproduce_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcvqe(dir.path(), &["run", "--system", "hhq", "--ansatz", "lucj", "--mode", "analytic"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let first = out.lines().next().unwrap().to_string();
    for key in ["E_LUCJ", "E_HF", "E_FCI"] {
        field(&first, key);
    }
    assert!(field(&first, "E_HF") >= field(&first, "E_LUCJ"));
    assert!(field(&first, "E_LUCJ") >= field(&first, "E_FCI") - 1e-9);
    for name in [
        "integrals.fcidump",
        "scf.txt",
        "hamiltonian.txt",
        "fci.txt",
        "vqe_trace.csv",
        "params.txt",
        "resources.csv",
        "summary.txt",
    ] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("# mcvqe "), "{name}");
        assert!(text.contains("# ansatz = \"lucj\""), "{name}");
    }
    let again = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.txt");
    let o = mcvqe(again.path(), &["run", "--config", summary.to_str().unwrap(), "--out-dir", again.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), first);
}

#[test]
fn params_file_round_trips_through_resources() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.txt");
    let o = mcvqe(
        dir.path(),
        &["run", "--system", "hhq", "--ansatz", "ucc:t2ee", "--params-out", params.to_str().unwrap()],
    );
    assert!(o.status.success());
    let o = mcvqe(
        dir.path(),
        &["resources", "--system", "hhq", "--ansatz", "ucc:t2ee", "--params-in", params.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ucc:t2ee"));
    let o = mcvqe(dir.path(), &["resources", "--ansatz", "lucj", "--params-in", params.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_table_has_only_reference_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcvqe(dir.path(), &["table1", "--system", "psh", "--pools", ""]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("\"hf\"") && rows[2].starts_with("\"fci\""));
}

#[test]
fn fcidump_export_import_preserves_energies() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("hhq.fcidump");
    let o = mcvqe(dir.path(), &["export-fcidump", "--system", "hhq", "-o", dump.to_str().unwrap()]);
    assert!(o.status.success());
    let direct = stdout(&mcvqe(dir.path(), &["fci", "--system", "hhq"]));
    let imported = stdout(&mcvqe(dir.path(), &["import-fcidump", dump.to_str().unwrap()]));
    assert!((field(&direct, "E_FCI") - field(&imported, "E_FCI")).abs() < 1e-10);
    assert!((field(&direct, "E_HF") - field(&imported, "E_HF")).abs() < 1e-10);
}

#[test]
fn mitigated_record_has_three_points_and_extrapolation() {
    let dir = tempfile::tempdir().unwrap();
    let o = mcvqe(dir.path(), &["mitigated", "--system", "hhq", "--repeats", "2", "--seed", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("mitigation.csv")).unwrap();
    let measured = csv.lines().filter(|l| l.starts_with("measured,")).count();
    let extrapolated = csv.lines().filter(|l| l.starts_with("extrapolated,")).count();
    assert_eq!((measured, extrapolated), (3, 1));
    assert!(stdout(&o).contains("E_PIE"));
}
