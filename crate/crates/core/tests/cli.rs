use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_s2m");

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(sub: &str, config: &Path, extra: &[&str]) -> Output {
    Command::new(BIN).arg(sub).arg("--config").arg(config).args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_owned()).collect()
}

fn numbers(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn matrix_examples() {
    let dir = TempDir::new().unwrap();
    let two = write_config(&dir, "two.json", r#"{"n":2,"real":[[2,1],[1,2]]}"#);
    let o = run("matrix", &two, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);

    let diag = write_config(&dir, "diag.json", r#"{"n":3,"real":[[1,0,0],[0,2,0],[0,0,3]]}"#);
    let o = run("matrix", &diag, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(numbers(&stdout(&o), "direct").iter().all(|&v| v == 0.0 || (v - 1.0).abs() < 1e-15));

    let repeated = write_config(&dir, "rep.json", r#"{"matrix":{"n":3,"real":[[2,0,0],[0,2,0],[0,0,5]]}}"#);
    let o = run("matrix", &repeated, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(column(&stdout(&o), "generic").iter().any(|g| g == "false"));

    let broken = write_config(&dir, "bad.json", r#"{"n":2,"real":[[2,1],[1]]}"#);
    assert_eq!(run("matrix", &broken, &[]).status.code(), Some(2));
    let not_hermitian = write_config(&dir, "nh.json", r#"{"n":2,"real":[[2,1],[0,2]]}"#);
    assert_eq!(run("matrix", &not_hermitian, &[]).status.code(), Some(2));
}

#[test]
fn random_suite_depends_only_on_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "suite.json", r#"{"random":{"count":20,"n_max":8}}"#);
    let a = run("matrix", &cfg, &["--seed", "5"]);
    let b = run("matrix", &cfg, &["--seed", "5"]);
    let c = run("matrix", &cfg, &["--seed", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn spectrum_examples() {
    let dir = TempDir::new().unwrap();
    let free = write_config(&dir, "free.json", &format!(r#"{{"a":0,"b":{PI},"K":5}}"#));
    let o = run("spectrum", &free, &[]);
    assert_eq!(o.status.code(), Some(0));
    for (k, v) in numbers(&stdout(&o), "lambda").iter().enumerate() {
        let exact = ((k + 1) * (k + 1)) as f64;
        assert!((v - exact).abs() <= 1e-10 * exact);
    }

    let split = write_config(&dir, "split.json", r#"{"a":0,"b":1,"x0":0.5,"K":6}"#);
    let out = stdout(&run("spectrum", &split, &[]));
    let tags = column(&out, "tag");
    let mult = column(&out, "multiplicity");
    let lam = numbers(&out, "lambda");
    let rows: Vec<usize> = (0..tags.len()).filter(|&i| tags[i] == "both").collect();
    assert_eq!(rows.len(), 3);
    for (j, &i) in rows.iter().enumerate() {
        let exact = (2.0 * (j + 1) as f64 * PI).powi(2);
        assert_eq!(mult[i], "2");
        assert!((lam[i] - exact).abs() <= 1e-9 * exact);
    }

    let linear =
        write_config(&dir, "lin.json", r#"{"a":0,"b":1,"K":8,"potential":{"type":"polynomial","coeffs":[0,1]}}"#);
    let out = stdout(&run("spectrum", &linear, &[]));
    let reference: Vec<f64> =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/linear_k8.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
    for (a, b) in numbers(&out, "lambda").iter().zip(&reference) {
        assert!((a - b).abs() <= 1e-6 * b);
    }
}

#[test]
fn reconstruct_examples() {
    let dir = TempDir::new().unwrap();
    let free =
        write_config(&dir, "free.json", r#"{"a":0,"b":1,"x0":0.5,"K":1000,"k_list":[1,2,3,4],"methods":["ratio"]}"#);
    let o = run("reconstruct", &free, &[]);
    assert_eq!(o.status.code(), Some(0));
    let esq = numbers(&stdout(&o), "esq");
    for (v, expected) in esq.iter().zip([2.0, 0.0, 2.0, 0.0]) {
        assert!((v - expected).abs() < 1e-4, "{v} vs {expected}");
    }

    let cosine = write_config(
        &dir,
        "cos.json",
        r#"{"a":0,"b":1,"x0":0.3,"K":1000,"k_list":[1,2,3],
            "potential":{"type":"trigsum","terms":[{"amplitude":1,"frequency":6.283185307179586}]}}"#,
    );
    let o = run("reconstruct", &cosine, &["--oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(numbers(&stdout(&o), "rel_err").iter().all(|&e| e <= 1e-3));

    let empty = write_config(&dir, "empty.json", r#"{"a":0,"b":1,"x0":0.5,"K":100,"k_list":[]}"#);
    assert_eq!(run("reconstruct", &empty, &[]).status.code(), Some(2));
}

#[test]
fn verify_examples() {
    let dir = TempDir::new().unwrap();
    let free = write_config(
        &dir,
        "free.json",
        r#"{"a":0,"b":1,"x0":0.5,"K":500,
            "verify":{"x_points":[0.2,0.4,0.5,0.6,0.8],"krein_z":[-5,-20],"trace_z":[-5]}}"#,
    );
    let o = run("verify", &free, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = report.as_array().unwrap();
    assert_eq!(entries.len(), 5 * 5 * 2 + 1 + 1 + 1);
    for e in entries {
        for key in ["check", "params", "lhs", "rhs", "residual", "budget", "pass"] {
            assert!(e.get(key).is_some(), "{key} missing");
        }
        assert_eq!(e["pass"], serde_json::Value::Bool(true));
    }
    // x = 0.2 and x' = 0.8 straddle the split point
    assert!(entries.iter().any(|e| e["params"]["x"] == 0.2 && e["params"]["x_prime"] == 0.8 && e["lhs"] == 0.0));

    let pole = write_config(
        &dir,
        "pole.json",
        &format!(r#"{{"a":0,"b":1,"x0":0.3,"verify":{{"x_points":[0.5],"krein_z":[{}]}}}}"#, PI * PI),
    );
    let o = run("verify", &pole, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pole proximity"));
}

#[test]
fn convergence_examples() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "conv.json",
        r#"{"a":0,"b":1,"x0":0.5,"convergence":{"k_values":[250,500,1000,2000],"esq_k":[1],"sin_k":[1]}}"#,
    );
    let o = run("convergence", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("K,method,value,error\n"));
    let series = |method: &str| -> Vec<(f64, f64)> {
        out.lines()
            .skip(1)
            .filter(|l| l.split(',').nth(1) == Some(method))
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[2].parse().unwrap(), f[3].parse().unwrap())
            })
            .collect()
    };
    let sin = series("sin_product_k1");
    assert_eq!(sin.len(), 4);
    for w in sin.windows(2) {
        // error ~ c/K: doubling K halves it
        assert!((w[0].1 / w[1].1 - 2.0).abs() < 0.05);
    }
    let c = series("c_ratio");
    assert!(c.iter().all(|(v, _)| (v - 0.25).abs() < 1e-6));
    let gap = series("gap_k1");
    assert!(gap.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn unknown_keys_and_bad_ranges_are_rejected() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(&dir, "u.json", r#"{"a":0,"b":1,"K":8,"colour":"red"}"#);
    assert_eq!(run("spectrum", &unknown, &[]).status.code(), Some(2));
    let range = write_config(&dir, "r.json", r#"{"a":0,"b":1,"K":8,"x0":2}"#);
    assert_eq!(run("spectrum", &range, &[]).status.code(), Some(2));
    let threads = write_config(&dir, "t.json", r#"{"a":0,"b":1,"K":8}"#);
    let o = Command::new(BIN).env("S2M_THREADS", "zero").args(["spectrum", "--config"]).arg(&threads).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "det.json",
        r#"{"a":0,"b":1,"x0_grid":[0.5,0.3],"K":300,"k_list":[3,1,2],
            "potential":{"type":"polynomial","coeffs":[0,1]}}"#,
    );
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let a = Command::new(BIN)
        .env("S2M_THREADS", "1")
        .args(["reconstruct", "--oracle", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    let b = Command::new(BIN)
        .args(["reconstruct", "--oracle", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_b)
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let (ta, tb) = (std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
    assert_eq!(ta, tb);
    // rows come out sorted by (x0, k, method)
    let text = String::from_utf8(ta).unwrap();
    let x0 = numbers(&text, "x0");
    assert!(x0.windows(2).all(|w| w[0] <= w[1]));

    let single = write_config(
        &dir,
        "single.json",
        r#"{"a":0,"b":1,"x0":0.3,"K":300,"potential":{"type":"polynomial","coeffs":[0,1]},
            "verify":{"x_points":[0.25,0.75],"krein_z":[-5],"trace_z":[-5]}}"#,
    );
    let v1 = run("verify", &single, &[]);
    let v2 = run("verify", &single, &[]);
    assert_eq!(v1.status.code(), Some(0));
    assert_eq!(v1.stdout, v2.stdout);
    let s1 = run("spectrum", &cfg, &[]);
    let s2 = run("spectrum", &cfg, &[]);
    assert_eq!(s1.stdout, s2.stdout);
}
