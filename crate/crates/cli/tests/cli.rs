use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leakywire")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn task(dir: &TempDir, task: &str, config: &str, extra: &[&str]) -> (Output, String) {
    let cfg = write(dir.path(), "run.toml", config);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap().to_owned();
    let mut args = vec![task, "--config", &cfg, "--out", &out];
    args.extend_from_slice(extra);
    (run(&args), out)
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let hash = lines.next().unwrap().to_owned();
    let _header = lines.next().unwrap();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (hash, rows)
}

#[test]
fn empty_geometry_sweep_is_transparent() {
    let dir = TempDir::new().unwrap();
    let (o, out) = task(&dir, "scatter", "alpha = 5.0\n[scatter]\ncount = 5\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (hash, rows) = csv_rows(&Path::new(&out).join("scatter.csv"));
    assert!(hash.starts_with("# config_sha256=") && hash.len() == 16 + 64);
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert_eq!((r[2], r[3], r[4], r[5]), (1.0, 0.0, 0.0, 0.0));
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&out).join("scatter_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config_sha256"].as_str().unwrap(), &hash[16..]);
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(summary["headline"]["max_unitarity_defect"], 0.0);
}

#[test]
fn malformed_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let (o, _) = task(&dir, "scatter", "alpha = 5.0\n[geometry]\nfamily = \"bump\"\nheigth = 0.5\nwidth = 1.0\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("heigth"), "{}", stderr(&o));

    let (o, _) = task(&dir, "scatter", "alpha = 5.0\n[scatter]\nlambda_min = -7.0\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scatter.lambda_min"), "{}", stderr(&o));

    let (o, _) = task(&dir, "spectrum", "alpha = 5.0\n[spectrum]\nlambda_max = -6.0\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("spectrum.lambda_max"), "{}", stderr(&o));

    let (o, _) = task(&dir, "scatter", "[scatter]\ncount = 2\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));

    let (o, _) = task(&dir, "scatter", "alpha = 5.0\nalpah = 1.0\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpah"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_invalid() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = run(&["scatter", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn conditioning_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = "alpha = 5.0\n[geometry]\nfamily = \"gap\"\nlength = 1.0\n[mesh]\npanel_length = 0.5\n\
               [scatter]\ncount = 1\n[tolerances]\ncondition_cap = 1.5\n";
    let (o, _) = task(&dir, "scatter", cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn output_does_not_depend_on_jobs() {
    let dir = TempDir::new().unwrap();
    let cfg = "alpha = 5.0\n[geometry]\nfamily = \"bump\"\nheight = 0.3\nwidth = 1.0\n[mesh]\npanel_length = 0.5\n\
               [scatter]\ncount = 4\n";
    let (o, out) = task(&dir, "scatter", cfg, &["--jobs", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let one = std::fs::read(Path::new(&out).join("scatter.csv")).unwrap();
    let (o, out) = task(&dir, "scatter", cfg, &["--jobs", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let three = std::fs::read(Path::new(&out).join("scatter.csv")).unwrap();
    assert_eq!(one, three);
    let (_, rows) = csv_rows(&Path::new(&out).join("scatter.csv"));
    for r in rows {
        assert!(r[8] < 1e-6, "unitarity defect {}", r[8]);
    }
}

#[test]
fn geometry_from_file_matches_family() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "geom.toml", "removed_intervals = [[-0.5, 0.5]]\n");
    let (o, out) = task(&dir, "scatter", "alpha = 5.0\n[geometry]\nfile = \"geom.toml\"\n[scatter]\ncount = 2\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (hash_file, rows_file) = csv_rows(&Path::new(&out).join("scatter.csv"));
    let (o, out) = task(&dir, "scatter", "alpha = 5.0\n[geometry]\nfamily = \"gap\"\nlength = 1.0\n[scatter]\ncount = 2\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (hash_family, rows_family) = csv_rows(&Path::new(&out).join("scatter.csv"));
    // same resolved configuration, same hash and output
    assert_eq!(hash_file, hash_family);
    assert_eq!(rows_file, rows_family);
}

#[test]
fn selftest_reports_passing_oracles() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("st");
    let o = run(&["selftest", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("selftest_summary.json")).unwrap()).unwrap();
    assert_eq!(v["headline"]["passed"], true);
    let checks = v["headline"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 4);
    for c in checks {
        assert!(c["observed"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn show_defaults_prints_the_table() {
    let o = run(&["--show-defaults"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let table: toml::Table = toml::from_str(&text).unwrap();
    assert!(table.contains_key("mesh") && table.contains_key("tolerances"));
    assert_eq!(table["conjecture_alphas"].as_array().unwrap().len(), 4);
}

#[test]
fn empty_geometry_spectrum_and_field() {
    let dir = TempDir::new().unwrap();
    let (o, out) = task(&dir, "spectrum", "alpha = 5.0\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&out).join("spectrum_summary.json")).unwrap()).unwrap();
    assert_eq!(v["headline"]["count"], 0);

    let (o, out) = task(&dir, "field", "alpha = 5.0\n[field.grid]\nx1_min = -1.0\nx1_max = 1.0\nn1 = 3\nx2_min = 0.0\nx2_max = 1.0\nn2 = 2\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&Path::new(&out).join("field.csv"));
    assert_eq!(rows.len(), 6);
}
