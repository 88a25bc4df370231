//! End-to-end command-line checks: the simulate -> fit -> predict ->
//! diagnose pipeline runs hands-free, structured terms parse and fit from
//! a plain config file, the shared boundary fit is spliced verbatim into
//! every quantile level, and user errors exit with code 2.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_inflaquant")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("inflaquant-{tag}-{}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("clear scratch directory");
    }
    std::fs::create_dir_all(&dir).expect("create scratch directory");
    dir
}

struct RunOutput {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_in(dir: &Path, args: &[&str]) -> RunOutput {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env_remove("INFLAQUANT_THREADS")
        .output()
        .expect("spawn the binary");
    RunOutput {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn expect_ok(dir: &Path, args: &[&str]) -> RunOutput {
    let out = run_in(dir, args);
    assert_eq!(
        out.code, 0,
        "`{}` failed with code {}:\n{}",
        args.join(" "),
        out.code,
        out.stderr
    );
    out
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path)
        .unwrap_or_else(|e| panic!("open {}: {e}", path.display()));
    let headers = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (headers, rows)
}

#[test]
fn simulate_fit_predict_diagnose_round_trip() {
    let dir = scratch("roundtrip");
    expect_ok(&dir, &["simulate", "--n", "120", "--seed", "5", "--out", "sim"]);
    for name in ["simulated.csv", "truth.csv", "config.toml"] {
        assert!(dir.join("sim").join(name).is_file(), "simulate should write {name}");
    }

    expect_ok(
        &dir,
        &["fit", "--config", "sim/config.toml", "--warmup", "200", "--draws", "250", "--out", "fit"],
    );
    assert!(dir.join("fit/meta_tau0.5.json").is_file());
    for c in 0..4 {
        assert!(dir.join(format!("fit/draws_tau0.5_chain{c}.csv")).is_file());
    }
    let (_, draw_rows) = read_csv(&dir.join("fit/draws_tau0.5_chain0.csv"));
    assert_eq!(draw_rows.len(), 250, "one row per retained draw");

    expect_ok(
        &dir,
        &["predict", "--fit", "fit", "--data", "sim/simulated.csv", "--out", "pred"],
    );
    let (headers, rows) = read_csv(&dir.join("pred/predictions_tau0.5.csv"));
    assert_eq!(rows.len(), 120, "one prediction row per data row");
    for col in [
        "quantile_mean",
        "quantile_lower",
        "quantile_upper",
        "p0_mean",
        "p1_mean",
    ] {
        assert!(headers.iter().any(|h| h == col), "missing prediction column {col}");
    }
    let q: f64 = rows[0][headers.iter().position(|h| h == "quantile_mean").unwrap()]
        .parse()
        .expect("numeric prediction");
    assert!((0.0..=1.0).contains(&q), "quantile prediction must stay in the unit interval");

    let diag = expect_ok(&dir, &["diagnose", "--fit", "fit", "--out", "diag"]);
    assert!(dir.join("diag/diagnostics_tau0.5.csv").is_file());
    assert!(dir.join("diag/acceptance_tau0.5.csv").is_file());
    let (_, diag_rows) = read_csv(&dir.join("diag/diagnostics_tau0.5.csv"));
    assert!(
        diag_rows.iter().any(|r| r[0] == "delta_sq"),
        "diagnostics should cover the precision parameter"
    );
    assert!(diag.stdout.contains("delta_sq"), "summary table should print to stdout");

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn shared_boundary_fit_is_spliced_into_every_level() {
    let dir = scratch("share");
    expect_ok(&dir, &["simulate", "--n", "100", "--seed", "6", "--out", "sim"]);
    expect_ok(
        &dir,
        &[
            "fit",
            "--config",
            "sim/config.toml",
            "--tau",
            "0.3,0.7",
            "--share-discrete",
            "--warmup",
            "150",
            "--draws",
            "200",
            "--out",
            "fit",
        ],
    );

    let (h3, r3) = read_csv(&dir.join("fit/draws_tau0.3_chain0.csv"));
    let (h7, r7) = read_csv(&dir.join("fit/draws_tau0.7_chain0.csv"));
    assert_eq!(h3, h7, "both levels store the same parameter layout");

    let discrete: Vec<usize> = h3
        .iter()
        .enumerate()
        .filter(|(_, n)| {
            ["pred0.", "pred1.", "nu_sq.pred0.", "nu_sq.pred1."]
                .iter()
                .any(|p| n.starts_with(p))
        })
        .map(|(i, _)| i)
        .collect();
    assert!(!discrete.is_empty(), "boundary parameters must exist");
    for (a, b) in r3.iter().zip(&r7) {
        for &i in &discrete {
            assert_eq!(a[i], b[i], "shared boundary draws must match verbatim in column {}", h3[i]);
        }
    }

    let cont = h3.iter().position(|n| n == "pred2.intercept").unwrap();
    assert!(
        r3.iter().zip(&r7).any(|(a, b)| a[cont] != b[cont]),
        "interior draws must differ between quantile levels"
    );

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn structured_terms_fit_from_a_plain_config() {
    let dir = scratch("terms");
    // Synthetic data with zeros, ones, a factor, regions, and numerics.
    let n = 90;
    let mut csv = String::from("y,x,z,v,g,region\n");
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let y = match i % 9 {
            0 => 0.0,
            1 => 1.0,
            _ => 0.08 + 0.84 * ((0.3 + 2.1 * t + 0.37 * (i as f64)).sin() * 0.5 + 0.5),
        };
        let g = ["a", "b", "c"][i % 3];
        let region = ["north", "south", "east", "west"][i % 4];
        csv.push_str(&format!(
            "{y},{t},{:.6},{:.6},{g},{region}\n",
            (1.7 * t).cos(),
            0.2 + 0.6 * t
        ));
    }
    std::fs::write(dir.join("data.csv"), csv).unwrap();
    std::fs::write(dir.join("adj.txt"), "# ring of four regions\nnorth south\nsouth east\neast west\nwest north\n").unwrap();

    let config = r#"
[data]
path = "data.csv"
response = "y"

[model]
inflation = "zero_and_one"
tau = [0.5]

[[model.zero.terms]]
type = "linear"
columns = ["z"]

[[model.one.terms]]
type = "random_intercept"
columns = ["g"]

[[model.continuous.terms]]
type = "pspline"
columns = ["x"]
n_basis = 8

[[model.continuous.terms]]
type = "mrf"
columns = ["region"]
adjacency = "adj.txt"
levels = ["north", "south", "east", "west"]

[[model.continuous.terms]]
type = "varying"
columns = ["v", "x"]
n_basis = 6

[run]
chains = 2
warmup = 100
draws = 120
seed = 1

[output]
dir = "fit"
"#;
    std::fs::write(dir.join("config.toml"), config).unwrap();

    expect_ok(&dir, &["fit", "--config", "config.toml"]);
    let (headers, rows) = read_csv(&dir.join("fit/draws_tau0.5_chain0.csv"));
    assert_eq!(rows.len(), 120);
    for prefix in ["pred0.lin(z)", "pred1.re(g)[", "pred2.f(x)[", "pred2.mrf(region)[", "pred2.v:f(x)["] {
        assert!(
            headers.iter().any(|h| h.starts_with(prefix)),
            "expected a parameter starting with {prefix}, got {headers:?}"
        );
    }

    expect_ok(&dir, &["predict", "--fit", "fit", "--data", "data.csv", "--out", "pred"]);
    let (_, pred_rows) = read_csv(&dir.join("pred/predictions_tau0.5.csv"));
    assert_eq!(pred_rows.len(), n);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn user_errors_exit_with_code_two() {
    let dir = scratch("errors");

    let missing = run_in(&dir, &["fit", "--config", "nope.toml", "--out", "x"]);
    assert_eq!(missing.code, 2, "missing config file is a user error: {}", missing.stderr);

    std::fs::write(dir.join("bad.csv"), "y,x\n0.5,0.1\n1.2,0.2\n").unwrap();
    std::fs::write(
        dir.join("bad.toml"),
        "[data]\npath = \"bad.csv\"\nresponse = \"y\"\n\n[model]\ninflation = \"zero\"\ntau = [0.5]\n\n[[model.zero.terms]]\ntype = \"linear\"\ncolumns = [\"x\"]\n\n[[model.continuous.terms]]\ntype = \"linear\"\ncolumns = [\"x\"]\n\n[run]\nchains = 1\nwarmup = 10\ndraws = 10\n\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let bad_data = run_in(&dir, &["fit", "--config", "bad.toml"]);
    assert_eq!(bad_data.code, 2, "out-of-range response is a user error: {}", bad_data.stderr);
    assert!(
        bad_data.stderr.contains("row"),
        "the error should point at the offending row: {}",
        bad_data.stderr
    );

    std::fs::write(dir.join("unknown.toml"), "[data]\npath = \"bad.csv\"\nresponse = \"y\"\nbogus_key = 1\n").unwrap();
    let unknown = run_in(&dir, &["fit", "--config", "unknown.toml"]);
    assert_eq!(unknown.code, 2, "unknown config key is a user error: {}", unknown.stderr);

    let no_fit = run_in(&dir, &["diagnose", "--fit", "empty-dir"]);
    assert_eq!(no_fit.code, 2, "missing fit directory is a user error: {}", no_fit.stderr);

    let bad_tau = run_in(&dir, &["fit", "--config", "bad.toml", "--tau", "1.5"]);
    assert_eq!(bad_tau.code, 2, "out-of-range quantile level is a user error: {}", bad_tau.stderr);

    std::fs::remove_dir_all(&dir).ok();
}
