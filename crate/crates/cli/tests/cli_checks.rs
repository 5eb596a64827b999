//! CLI-level behavior: reproducibility of run records, sweep trends, output
//! shape, and process exit codes.

use std::process::Command;

use pass_sensing_cli::config::{ExperimentConfig, ProblemChoice, ProtocolChoice, SamplerBlock};
use pass_sensing_cli::record::{record_csv_row, RECORD_CSV_HEADER};
use pass_sensing_cli::runner::{run, sweep, SweepParam};

fn quick_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.prior.sampler = Some(SamplerBlock {
        num_targets: 3,
        seed,
        ..SamplerBlock::for_waveguide(cfg.scenario.waveguide_length_m)
    });
    cfg.scenario.num_pas = 3;
    cfg.solver.gh_order = 40;
    cfg.solver.step_m = 0.5;
    cfg
}

#[test]
fn rerunning_a_config_reproduces_the_result_bit_for_bit() {
    let cfg = quick_config(11);
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.result.digest(), b.result.digest());
    assert_eq!(a.config_hash, b.config_hash);
    // a different seed must change the outcome
    let c = run(&quick_config(12)).unwrap();
    assert_ne!(a.result.digest(), c.result.digest());
}

#[test]
fn sweep_is_thread_count_invariant_and_ordered() {
    let cfg = quick_config(3);
    let values = [5.0, 10.0, 15.0];
    let serial = sweep(&cfg, SweepParam::PmaxDbm, &values, 1, 1).unwrap();
    let parallel = sweep(&cfg, SweepParam::PmaxDbm, &values, 1, 2).unwrap();
    assert_eq!(serial.len(), parallel.len());
    for (s, p) in serial.iter().zip(&parallel) {
        assert_eq!(s.value, p.value);
        assert_eq!(s.record.result.digest(), p.record.result.digest());
    }
    // rows come out sorted by sweep value
    for w in serial.windows(2) {
        assert!(w[0].value <= w[1].value);
    }
}

#[test]
fn budget_sweep_shows_non_increasing_worst_case_bcrb() {
    let cfg = quick_config(7);
    let points = sweep(&cfg, SweepParam::PmaxDbm, &[0.0, 5.0, 10.0, 15.0], 1, 1).unwrap();
    for w in points.windows(2) {
        let a = w[0].record.result.max_root_bcrb_m();
        let b = w[1].record.result.max_root_bcrb_m();
        assert!(
            b <= a * (1.0 + 1e-12),
            "max root BCRB increased with budget: {a} -> {b}"
        );
    }
}

#[test]
fn threshold_sweep_shows_non_increasing_total_power() {
    let mut cfg = quick_config(7);
    cfg.solver.problem = ProblemChoice::PowerMin;
    let points = sweep(&cfg, SweepParam::GammaSen, &[0.01, 0.02, 0.04, 0.08], 1, 1).unwrap();
    for w in points.windows(2) {
        let a = w[0].record.result.total_power_w();
        let b = w[1].record.result.total_power_w();
        assert!(
            b <= a * (1.0 + 1e-12),
            "total power increased with a looser threshold: {a} -> {b}"
        );
    }
}

#[test]
fn pa_count_sweep_trends_downward_then_flattens() {
    // Adding the second PA completes the FIM rank and slashes the BCRB;
    // beyond that the per-seed column keeps a downward trend but wiggles a
    // few percent (greedy grid search + quadrature noise), flattening out
    // rather than decreasing strictly.
    let mut cfg = quick_config(4);
    cfg.prior.sampler.as_mut().unwrap().num_targets = 1;
    cfg.solver.protocol = ProtocolChoice::Ps;
    // the in-waveguide phase advances ~27 degrees per 0.1 m, so this step
    // lets the search tune inter-PA coherence; coarser grids cannot
    cfg.solver.step_m = 0.1;
    let values: Vec<f64> = (1..=6).map(|m| m as f64).collect();
    let points = sweep(&cfg, SweepParam::NumPas, &values, 1, 1).unwrap();
    let bcrbs: Vec<f64> = points
        .iter()
        .map(|p| p.record.result.bcrbs_m2[0])
        .collect();
    assert!(
        bcrbs[1] < bcrbs[0],
        "second PA must improve the rank-one bound: {bcrbs:?}"
    );
    let mut best_so_far = bcrbs[0].min(bcrbs[1]);
    for (i, &b) in bcrbs.iter().enumerate().skip(2) {
        assert!(
            b <= 1.25 * best_so_far,
            "BCRB at M={} regressed beyond the wiggle band: {b:e} vs best {best_so_far:e}",
            i + 1
        );
        best_so_far = best_so_far.min(b);
    }
}

#[test]
fn trials_replicate_with_consecutive_seeds() {
    let cfg = quick_config(100);
    let points = sweep(&cfg, SweepParam::PmaxDbm, &[10.0], 3, 1).unwrap();
    assert_eq!(points.len(), 3);
    let seeds: Vec<u64> = points.iter().map(|p| p.record.seed).collect();
    assert_eq!(seeds, vec![100, 101, 102]);
    assert_ne!(
        points[0].record.result.digest(),
        points[1].record.result.digest()
    );
}

#[test]
fn csv_rows_match_the_header() {
    let record = run(&quick_config(2)).unwrap();
    let row = record_csv_row(&record);
    assert_eq!(row.split(',').count(), RECORD_CSV_HEADER.split(',').count());
}

// ---------------------------------------------------------------------------
// Binary-level checks
// ---------------------------------------------------------------------------

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pass-sense"))
}

#[test]
fn binary_reports_success_and_csv_output() {
    let out = binary()
        .args([
            "min-max",
            "--seed",
            "5",
            "--gh-order",
            "30",
            "--step",
            "0.5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("config_hash,"), "got: {stdout}");
}

#[test]
fn binary_exits_with_config_error_on_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"solver\": {\"nope\": 1}}").unwrap();
    let out = binary()
        .args(["min-max", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_exits_with_infeasible_code_when_threshold_is_unreachable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.json");
    // single PA, near-point prior: the rank-one floor blocks the threshold
    let cfg = r#"{
        "scenario": {
            "carrier_frequency_hz": 2.8e10, "effective_index": 1.4,
            "waveguide_length_m": 10.0, "waveguide_height_m": 3.0,
            "num_pas": 1, "min_spacing_m": null, "noise_dbm": -90.0
        },
        "prior": { "targets": [ {
            "x": [ {"weight": 1.0, "mean_m": 4.0, "variance_m2": 1e-12} ],
            "y": [ {"weight": 1.0, "mean_m": 5.0, "variance_m2": 1e-12} ]
        } ] },
        "solver": {
            "protocol": "ps", "problem": "power-min",
            "gamma_sen_m2": 1e-15, "pmax_dbm": null, "high_snr": false,
            "step_m": 0.5, "convergence_tol": 1e-4, "max_outer_iters": 50,
            "gh_order": 20
        },
        "output": { "format": "csv", "trace": false }
    }"#;
    std::fs::write(&path, cfg).unwrap();
    let out = binary()
        .args(["power-min", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn binary_writes_json_records_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = binary()
        .args([
            "power-min",
            "--seed",
            "9",
            "--gh-order",
            "30",
            "--step",
            "0.5",
            "--gamma-sen",
            "0.05",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: Vec<pass_sensing_cli::record::RunRecord> =
        serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].result.problem, "power-min");
}
