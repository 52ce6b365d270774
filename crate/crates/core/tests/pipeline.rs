use rpv_core::config::{AnalysisConfig, ParametricTest};
use rpv_core::io::{digest, load_csv, write_csv};
use rpv_core::pipeline::{run_pipeline, simulate_experiment};
use rpv_core::rank::Decision;
use rpv_core::report::{Stage, StageResult};
use rpv_core::ZiLogNormalParams;

fn x_cell_data() -> rpv_core::ExperimentData {
    let c = ZiLogNormalParams::new(0.05, 4.0, 1.0).unwrap();
    let t = ZiLogNormalParams::new(0.07, 3.7, 1.0).unwrap();
    (0..50)
        .map(|seed| simulate_experiment(&c, &t, 5000, seed).unwrap())
        .find(|d| {
            let r = rpv_core::rank::two_part_test(d, &AnalysisConfig::default().two_part()).unwrap();
            r.decision == Decision::Indeterminate
        })
        .expect("an indeterminate sample among 50 seeds")
}

#[test]
fn identical_groups_stop_with_no_change() {
    let p = ZiLogNormalParams::new(0.2, 2.0, 0.5).unwrap();
    let x = rpv_core::simulate(&p, 1000, 5).unwrap();
    let data = rpv_core::ExperimentData::new(x.clone(), x).unwrap();
    let report = run_pipeline(&data, &AnalysisConfig::default()).unwrap();
    assert_eq!(report.stage, vec![Stage::TwoPart]);
    let StageResult::TwoPart(r) = report.result[0] else { panic!() };
    assert_eq!((r.z_p, r.z_u, r.l), (0.0, Some(0.0), 0.0));
    assert_eq!(r.decision, Decision::NoChange);
}

#[test]
fn x_cell_proceeds_to_parametric_stage() {
    let data = x_cell_data();
    let report = run_pipeline(&data, &AnalysisConfig::default()).unwrap();
    assert_eq!(report.stage, vec![Stage::TwoPart, Stage::DeltaCi]);
    assert!(report.verdict.starts_with("delta CI"));
    assert!(report.warnings.iter().any(|w| w.contains(&report.inputs_digest)));

    let cfg = AnalysisConfig {
        parametric: ParametricTest::Lrt,
        ..Default::default()
    };
    let report = run_pipeline(&data, &cfg).unwrap();
    assert_eq!(report.stage, vec![Stage::TwoPart, Stage::Lrt]);
    let StageResult::Lrt(l) = &report.result[1] else { panic!() };
    assert!(l.converged);
    assert_eq!(report.verdict.contains("no significant"), !l.reject);
}

#[test]
fn reports_are_deterministic() {
    let data = x_cell_data();
    let cfg = AnalysisConfig::default();
    assert_eq!(run_pipeline(&data, &cfg).unwrap().to_json(), run_pipeline(&data, &cfg).unwrap().to_json());
}

#[test]
fn simulate_save_load_round_trip() {
    let c = ZiLogNormalParams::new(0.3, 1.0, 2.0).unwrap();
    let t = ZiLogNormalParams::new(0.25, 1.2, 1.5).unwrap();
    let data = simulate_experiment(&c, &t, 3000, 99).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    write_csv(&data, std::fs::File::create(&path).unwrap()).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back, data);
    assert_eq!(digest(&back), digest(&data));
}
