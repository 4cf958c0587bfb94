use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use restricted_approx::report::ReportRow;
use restricted_approx_cli::config::ExperimentConfig;
use restricted_approx_cli::output::read_csv;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn rapprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rapprox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows_of(out: &Output) -> Vec<ReportRow> {
    read_csv(&String::from_utf8_lossy(&out.stdout)).expect("CSV report")
}

fn value(rows: &[ReportRow], id: &str) -> f64 {
    rows.iter()
        .find(|r| r.id == id)
        .unwrap_or_else(|| panic!("no row {id}"))
        .value
}

/// Drops the trailing wall-time column of every line.
fn without_wall_time(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            l.rsplit_once(',')
                .map(|(head, _)| head.to_string())
                .unwrap_or_default()
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

// Oracles for sample.seq: d = 1, f^{1/2}_{2,1}, nu_{1/2}, eta = t^{1/2}, mu = 1, xi = 1/2.

fn sample_entries() -> Vec<(i32, i64, f64)> {
    std::fs::read_to_string(fixture("sample.seq"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect()
}

/// `||(sum_Q |Q|^{-s-1/2} |v_Q| chi_Q)||_{L^2}` with `s = 1/2`, by summing
/// over cells of the finest scale, on which the integrand is constant.
fn tl_oracle(entries: &[(i32, i64, f64)]) -> f64 {
    if entries.is_empty() {
        return 0.0;
    }
    let fine = entries.iter().map(|e| e.0).max().unwrap();
    let width = (-fine as f64).exp2();
    let lo = entries
        .iter()
        .map(|&(j, k, _)| k as f64 * (-j as f64).exp2())
        .fold(f64::INFINITY, f64::min);
    let hi = entries
        .iter()
        .map(|&(j, k, _)| (k + 1) as f64 * (-j as f64).exp2())
        .fold(f64::NEG_INFINITY, f64::max);
    let cells = ((hi - lo) / width).round() as i64;
    let mut total = 0.0;
    for c in 0..cells {
        let x = lo + (c as f64 + 0.5) * width;
        let g: f64 = entries
            .iter()
            .filter(|&&(j, k, _)| {
                let side = (-j as f64).exp2();
                k as f64 * side <= x && x < (k + 1) as f64 * side
            })
            .map(|&(j, _, v)| (j as f64).exp2() * v.abs())
            .sum();
        total += g * g * width;
    }
    total.sqrt()
}

/// `sum_j (sum_{|Q| = 2^-j} (2^{j/2} |v_Q|)^2)^{1/2}`.
fn besov_oracle(entries: &[(i32, i64, f64)]) -> f64 {
    let mut scales: Vec<i32> = entries.iter().map(|e| e.0).collect();
    scales.sort();
    scales.dedup();
    scales
        .iter()
        .map(|&j| {
            entries
                .iter()
                .filter(|e| e.0 == j)
                .map(|e| (j as f64).exp2() * e.2 * e.2)
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

/// `int t^{1/2} a*(t) dt/t = sum_k a_k 2(sqrt T_k - sqrt T_{k-1})` with
/// `a_Q = 2^{j/2} |v_Q|` and `nu(Q) = 2^{-j/2}`.
fn lorentz_oracle(entries: &[(i32, i64, f64)]) -> f64 {
    let mut items: Vec<(f64, f64)> = entries
        .iter()
        .map(|&(j, _, v)| ((j as f64 / 2.0).exp2() * v.abs(), (-j as f64 / 2.0).exp2()))
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut t = 0.0f64;
    let mut acc = 0.0;
    for (a, m) in items {
        acc += a * 2.0 * ((t + m).sqrt() - t.sqrt());
        t += m;
    }
    acc
}

/// `int t^{1/2} sigma(t) dt/t` with `sigma` from every subset.
fn approx_oracle(entries: &[(i32, i64, f64)]) -> f64 {
    let n = entries.len();
    let mut subsets: Vec<(f64, f64)> = (0..1u32 << n)
        .map(|mask| {
            let mass: f64 = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| (-entries[i].0 as f64 / 2.0).exp2())
                .sum();
            let rest: Vec<_> = (0..n)
                .filter(|i| mask >> i & 1 == 0)
                .map(|i| entries[i])
                .collect();
            (mass, tl_oracle(&rest))
        })
        .collect();
    subsets.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut best = f64::INFINITY;
    for w in subsets.windows(2) {
        best = best.min(w[0].1);
        acc += best * 2.0 * (w[1].0.sqrt() - w[0].0.sqrt());
    }
    acc
}

#[test]
fn golden_values_match_the_oracles() {
    let golden = read_csv(include_str!("golden/norm.csv")).unwrap();
    let e = sample_entries();
    for (id, expected) in [
        ("norm/1-tl", tl_oracle(&e)),
        ("norm/2-besov", besov_oracle(&e)),
        ("norm/3-lorentz", lorentz_oracle(&e)),
        ("norm/4-approx", approx_oracle(&e)),
    ] {
        let got = value(&golden, id);
        assert!(
            rel(got, expected) < 1e-12,
            "{id}: golden {got}, oracle {expected}"
        );
    }
}

#[test]
fn norm_reproduces_the_golden_file() {
    let out = rapprox(&["norm", "--config", fixture("sample.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        without_wall_time(&String::from_utf8_lossy(&out.stdout)),
        without_wall_time(include_str!("golden/norm.csv"))
    );
}

#[test]
fn unit_atom_closed_forms() {
    let out = rapprox(&[
        "norm",
        "--config",
        fixture("unit_atom.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows_of(&out);
    // ||e_Q|| = 1 in every space at |Q| = 1; approx: ||e_Q|| nu(Q)^xi (xi mu)^{-1/mu} = 2
    assert_eq!(value(&rows, "norm/1-tl"), 1.0);
    assert_eq!(value(&rows, "norm/2-besov"), 1.0);
    assert_eq!(value(&rows, "norm/3-lorentz"), 1.0);
    assert!(rel(value(&rows, "norm/4-approx"), 2.0) < 1e-15);
}

#[test]
fn empty_file_gives_zeros() {
    let out = rapprox(&["norm", "--config", fixture("empty.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows_of(&out);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.value == 0.0), "{rows:?}");
}

#[test]
fn identical_runs_are_identical_apart_from_wall_time() {
    let args = ["democracy", "--seed", "11"];
    let a = rapprox(&args);
    let b = rapprox(&args);
    let (a, b) = (
        String::from_utf8_lossy(&a.stdout),
        String::from_utf8_lossy(&b.stdout),
    );
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let c = rapprox(&["democracy", "--seed", "12"]);
    assert_ne!(
        without_wall_time(&a),
        without_wall_time(&String::from_utf8_lossy(&c.stdout))
    );
}

#[test]
fn rows_are_sorted_by_id() {
    for cmd in ["sigma", "approx-norm"] {
        let out = rapprox(&[cmd, "--config", fixture("sample.toml").to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let ids: Vec<String> = rows_of(&out).into_iter().map(|r| r.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }
}

#[test]
fn json_mirrors_csv() {
    let cfg = fixture("sample.toml");
    let csv = rows_of(&rapprox(&["sigma", "--config", cfg.to_str().unwrap()]));
    let json = rapprox(&[
        "sigma",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let json: Vec<serde_json::Value> = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(csv.len(), json.len());
    for (c, j) in csv.iter().zip(&json) {
        assert_eq!(j["id"], c.id.as_str());
        assert_eq!(j["value"].as_f64().unwrap(), c.value);
        assert_eq!(j["detail"], c.detail.as_str());
    }
}

#[test]
fn out_dir_receives_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = rapprox(&["bernstein", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("bernstein.csv")).unwrap();
    assert!(text.starts_with(
        "id,experiment,params,quantity,value,passed,tolerance,anchor,detail,wall_seconds"
    ));
}

#[test]
fn tower_and_row_at_alpha_one() {
    let out = rapprox(&[
        "democracy",
        "--config",
        fixture("tower.toml").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = rows_of(&out);
    // nu_1 = N for both; value N^{1/q1} for the tower, N^{1/p1} for the row
    let expected = [
        (1.0f64, 1.0f64),
        (4.0, 4f64.powf(1.0 / 3.0 - 0.5)),
        (12.0, 12f64.powf(1.0 / 3.0 - 0.5)),
        (1.0, 1.0),
        (5.0, 1.0),
        (64.0, 1.0),
    ];
    for (i, (_, ratio)) in expected.iter().enumerate() {
        let got = value(&rows, &format!("democracy/1-family-{:03}", i + 1));
        assert!(
            rel(got, *ratio) < 1e-9,
            "family {}: {got} vs {ratio}",
            i + 1
        );
    }
    let e = value(&rows, "democracy/5-divergence");
    assert!((e - 1.0 / 6.0).abs() < 0.05);
    assert_eq!(value(&rows, "democracy/0-verdict"), 0.0);
}

#[test]
fn wrong_alpha_fails_the_democracy_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("off.toml");
    std::fs::write(&cfg, "[democracy]\nalpha = 0.1\n").unwrap();
    let out = rapprox(&["democracy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rows = rows_of(&out);
    let drift = rows
        .iter()
        .find(|r| r.id == "democracy/3-scale-drift")
        .unwrap();
    assert!(!drift.passed);
    assert!(!drift.anchor.is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(rapprox(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rapprox(&["norm", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(
        rapprox(&["norm", "--config", "/nonexistent/x.toml"])
            .status
            .code(),
        Some(2)
    );
    // no sequence configured
    assert_eq!(rapprox(&["norm"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad_seq = dir.path().join("bad.seq");
    std::fs::write(&bad_seq, "0 0 1\n1 0\n").unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sequence = \"bad.seq\"\n").unwrap();
    let out = rapprox(&["norm", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    std::fs::write(&cfg, "[jackson]\nsizes = [12]\n").unwrap();
    assert_eq!(
        rapprox(&["jackson", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_validation() {
    let path = fixture("sample.toml");
    let cfg = ExperimentConfig::load(&path).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.sequence.unwrap(), fixture("sample.seq"));

    for bad in [
        "d = 0",
        "[space]\nkind = \"sobolev\"",
        "[space]\np = 0.0",
        "[lorentz]\neta = \"power:p=0\"",
        "[approx]\nsolver = \"magic\"",
        "[approx]\nbudgets = [-1.0]",
        "[democracy]\nf1 = { kind = \"besov\" }",
        "[democracy]\nfit_sizes = [8]",
        "[verify]\ncriteria = [11]",
        "[lorentz_besov]\ntaus = []",
    ] {
        let parsed = ExperimentConfig::parse(bad, Path::new("x.toml"));
        assert!(
            parsed.and_then(|c| c.validate()).is_err(),
            "accepted: {bad}"
        );
    }
}

#[test]
fn verify_all_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("neg.toml");
    std::fs::write(&cfg, "[verify]\ncriteria = [3]\nalpha_offset = 0.1\n").unwrap();
    let out = rapprox(&["verify-all", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rows = rows_of(&out);
    assert_eq!(rows.len(), 1);
    assert!(!rows[0].passed && !rows[0].anchor.is_empty());
}

#[test]
fn verify_all_passes_by_default() {
    let out = rapprox(&["verify-all"]);
    let rows = rows_of(&out);
    let failing: Vec<_> = rows.iter().filter(|r| !r.passed).map(|r| &r.id).collect();
    assert_eq!(out.status.code(), Some(0), "failing: {failing:?}");
    let ids: Vec<_> = rows.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids.len(), 10);
    assert_eq!(ids[0], "verify/01");
    assert_eq!(ids[9], "verify/10");
}
