//! The exit gate: one test per shipped claim, each printing a verdict line
//! with the measured value against its pinned bound. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines for
//! passing criteria too.

use std::process::Command;
use std::sync::OnceLock;

use zenosim_cli::battery::{run_battery, BatteryCheck};
use zenosim_cli::config::parse_config;
use zenosim_cli::presets::find_preset;
use zenosim_cli::runner::{run_experiment, RunArtifacts};

fn verdict(criterion: usize, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "[criterion {criterion}] {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    assert!(pass, "{line}");
}

fn preset_run(name: &str) -> RunArtifacts {
    let preset = find_preset(name).unwrap_or_else(|| panic!("preset `{name}` exists"));
    run_experiment(&preset.config, Some(name))
        .unwrap_or_else(|e| panic!("preset `{name}` failed: {e}"))
}

/// Criteria 5, 6, 7, and 9 read different checks of the same seeded battery.
fn battery() -> &'static [BatteryCheck] {
    static BATTERY: OnceLock<Vec<BatteryCheck>> = OnceLock::new();
    BATTERY.get_or_init(|| run_battery(90210))
}

fn battery_check(id: usize) -> &'static BatteryCheck {
    battery()
        .iter()
        .find(|c| c.id == id)
        .unwrap_or_else(|| panic!("battery check {id} exists"))
}

fn battery_criterion(criterion: usize, name: &str, ids: &[usize]) {
    let mut pass = true;
    let mut details = Vec::new();
    for &id in ids {
        let c = battery_check(id);
        pass &= c.pass;
        details.push(format!("{} = {:.3e} vs {:.3e}", c.name, c.measured, c.bound));
    }
    verdict(criterion, name, pass, &details.join("; "));
}

#[test]
fn criterion_01_zeno_suppression_matches_the_closed_form() {
    let mut survivals = Vec::new();
    let mut worst: f64 = 0.0;
    for n in [10usize, 100, 1000] {
        let config = parse_config(&format!(
            r#"{{"experiment": "zeno-qubit", "schedule": {{"total_time": 1.0, "n_steps": {n}}}}}"#
        ))
        .expect("benchmark config is valid");
        let arts = run_experiment(&config, None).expect("benchmark runs");
        let survival = *arts.table.column("survival").unwrap().last().unwrap();
        let oracle = (std::f64::consts::PI / (2.0 * n as f64)).cos().powi(2 * n as i32);
        worst = worst.max((survival - oracle).abs());
        survivals.push(survival);
    }
    let increasing = survivals.windows(2).all(|w| w[1] > w[0]);
    let pass = worst <= 1e-10 && increasing && survivals[2] > 0.997;
    verdict(
        1,
        "survival under frequent questioning matches cos^2n(pi/2n)",
        pass,
        &format!(
            "max deviation {worst:.3e} vs 1e-10; survivals at n = 10, 100, 1000: \
             {:.6}, {:.6}, {:.6}; increasing = {increasing}; final > 0.997",
            survivals[0], survivals[1], survivals[2]
        ),
    );
}

#[test]
fn criterion_02_per_interval_leakage_is_quadratic() {
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["leakage-qubit", "leakage-random8"] {
        let arts = preset_run(name);
        let exponent = arts.summary.scalar("fitted_exponent").unwrap();
        pass &= (1.9..=2.1).contains(&exponent);
        details.push(format!("{name} exponent = {exponent:.4}"));
    }
    verdict(2, "log-log leakage exponent in [1.9, 2.1]", pass, &details.join("; "));
}

#[test]
fn criterion_03_compressed_generator_converges_first_order() {
    let arts = preset_run("php-three-level");
    let deviations = arts.table.column("deviation").unwrap();
    let counts = arts.table.column("n_steps").unwrap();
    let decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    let mut ratios = Vec::new();
    for i in 0..counts.len() - 1 {
        if counts[i + 1] == 2.0 * counts[i] {
            ratios.push(deviations[i] / deviations[i + 1]);
        }
    }
    let ratios_ok = !ratios.is_empty() && ratios.iter().all(|r| (1.5..=2.5).contains(r));
    let pass = decreasing && ratios_ok;
    verdict(
        3,
        "distance to compressed-generator propagation halves with doubled step count",
        pass,
        &format!(
            "deviations decreasing = {decreasing}; doubling ratios {:?} within [1.5, 2.5]",
            ratios.iter().map(|r| (r * 1e3).round() / 1e3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_04_recording_the_answers_leaves_survival_unchanged() {
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["decoherence-qubit", "decoherence-oscillator"] {
        let arts = preset_run(name);
        let worst = arts
            .table
            .column("max_row_deviation")
            .unwrap()
            .into_iter()
            .fold(0.0_f64, f64::max);
        let compatible = arts.summary.flag("basis_compatible") == Some(true);
        pass &= worst <= 1e-12 && compatible;
        details.push(format!("{name} max curve deviation = {worst:.3e} vs 1e-12"));
    }
    verdict(
        4,
        "survival curves coincide across dephasing strengths 0, 0.25, 0.5, 1",
        pass,
        &details.join("; "),
    );
}

#[test]
fn criterion_05_reduction_frequency_matches_the_trace_ratio() {
    battery_criterion(5, "yes-frequency of 1e5 seeded reductions within 3 sigma of 1/2", &[1]);
}

#[test]
fn criterion_06_question_posing_algebra_holds_on_random_instances() {
    battery_criterion(
        6,
        "trace preservation, idempotence, commuting identity over 120 instances",
        &[2, 3, 4],
    );
}

#[test]
fn criterion_07_partial_trace_recovers_factors_and_bell_mixture() {
    battery_criterion(7, "partial-trace product and Bell oracles", &[5, 6]);
}

#[test]
fn criterion_08_effort_prolongs_the_hold_duration() {
    let arts = preset_run("attention-sweep");
    let holds = arts.table.column("deterministic_hold").unwrap();
    let means = arts.table.column("sampled_mean").unwrap();
    let errs = arts.table.column("sampled_std_err").unwrap();

    let det_ok = holds.windows(2).all(|w| w[1] >= w[0]);
    let mut sampled_ok = true;
    for i in 0..means.len() - 1 {
        let slack = 2.0 * (errs[i] + errs[i + 1]);
        sampled_ok &= means[i + 1] + slack >= means[i];
    }
    let pass = det_ok && sampled_ok;
    verdict(
        8,
        "hold duration non-decreasing in effort, sampled within 2 standard errors",
        pass,
        &format!(
            "deterministic holds {:?} non-decreasing = {det_ok}; sampled monotone = {sampled_ok}",
            holds.iter().map(|h| (h * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_09_selection_matches_the_exhaustive_oracle() {
    battery_criterion(9, "argmax selection and scale invariance on 100 instances", &[7, 8]);
}

#[test]
fn criterion_10_identical_preset_and_seed_reproduce_the_csv_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for run in ["first", "second"] {
        let out_dir = dir.path().join(run);
        let output = Command::new(env!("CARGO_BIN_EXE_zenosim"))
            .args(["simulate", "--preset", "attention-sweep", "--seed", "5150", "--out"])
            .arg(&out_dir)
            .output()
            .expect("binary spawns");
        assert!(
            output.status.success(),
            "binary failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        csvs.push(std::fs::read(out_dir.join("attention-sweep.csv")).unwrap());
    }
    let pass = csvs[0] == csvs[1];
    verdict(
        10,
        "two runs of the same preset and seed emit identical bytes",
        pass,
        &format!("{} bytes each, equal = {pass}", csvs[0].len()),
    );
}
