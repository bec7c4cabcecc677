use ffr_inertia::analytics::initial_rocof;
use ffr_inertia_scenario::output::{read_trace_csv, write_trace, write_case_study};
use ffr_inertia_scenario::{
    emit_trace_csv, load_case_study, load_config, run_case_study, run_subcase, CaseStudyConfig,
    ScenarioConfig, ScenarioError, Subcase, SummaryMetrics,
};
use serde_json::{json, Value};

fn bundled_json() -> Value {
    serde_json::from_str(include_str!("../configs/vdic.json")).unwrap()
}

fn parse(v: &Value) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::from_json(&serde_json::to_string_pretty(v).unwrap(), "test.json")
}

fn invalid_field(err: ScenarioError) -> String {
    match err {
        ScenarioError::Invalid { field, .. } => field,
        other => panic!("expected invalid-field error, got {other}"),
    }
}

fn short(subcase: Subcase, governor: bool) -> ScenarioConfig {
    let mut c = CaseStudyConfig::bundled().with_sim_overrides(None, Some(15.0)).unwrap();
    if !governor {
        c.governor = ffr_inertia::GovernorSpec::disabled();
    }
    c.scenario(subcase)
}

#[test]
fn loads_files_from_disk() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let c = load_config(format!("{dir}/configs/vdic.json").as_ref()).unwrap();
    assert_eq!(c, ScenarioConfig::bundled());
    let cs = load_case_study(format!("{dir}/configs/case_study.json").as_ref()).unwrap();
    assert_eq!(cs, CaseStudyConfig::bundled());
    assert!(matches!(
        load_config("/nonexistent/cfg.json".as_ref()),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn missing_schedule_block_is_named() {
    let mut v = bundled_json();
    v.as_object_mut().unwrap().remove("vdic_schedule");
    let err = parse(&v).unwrap_err();
    assert!(err.to_string().contains("vdic_schedule"), "{err}");
    assert_eq!(invalid_field(err), "vdic_schedule");
}

#[test]
fn surplus_block_rejected() {
    let mut v = bundled_json();
    v["constant_droop"] = json!({ "k_total_pu": 32.0 });
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "constant_droop");
}

#[test]
fn step_longer_than_run_rejected() {
    let mut v = bundled_json();
    v["sim"]["time_step_s"] = json!(30.0);
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "sim");
}

#[test]
fn run_ending_before_onset_rejected() {
    let mut v = bundled_json();
    v["sim"]["duration_s"] = json!(8.0);
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "sim.duration_s");
}

#[test]
fn zero_imbalance_rejected() {
    let mut v = bundled_json();
    v["event"]["delta_pf_pu"] = json!(0.0);
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "event");

    let mut cs: Value = serde_json::from_str(include_str!("../configs/case_study.json")).unwrap();
    cs["event"]["delta_pf_pu"] = json!(0.0);
    let err = CaseStudyConfig::from_json(&cs.to_string(), "cs.json").unwrap_err();
    assert_eq!(invalid_field(err), "event");
}

#[test]
fn bad_generator_and_ffr_fields_named() {
    let mut v = bundled_json();
    v["system"]["generators"][0]["inertia_constant_s"] = json!(-1.0);
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "system.generators[0]");

    let mut v = bundled_json();
    v["system"]["ffrs"][2]["droop_optimal_pu"] = json!(64.0);
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "system.ffrs[2]");

    let mut v = bundled_json();
    v["system"]["ffrs"][0]["id"] = json!("a,b");
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "system.ffrs[0].id");
}

#[test]
fn parse_errors_carry_position_and_path() {
    let mut v = bundled_json();
    v["event"]["delta_pf_pu"] = json!("lots");
    match parse(&v).unwrap_err() {
        ScenarioError::Parse { line, field, .. } => {
            assert_eq!(field, "event.delta_pf_pu");
            assert!(line > 1);
        }
        other => panic!("{other}"),
    }

    let mut v = bundled_json();
    v["sim"]["integrator"] = json!("midpoint");
    assert!(matches!(parse(&v), Err(ScenarioError::Parse { .. })));

    let mut v = bundled_json();
    v["sim"]["stepsize"] = json!(1.0);
    let err = parse(&v).unwrap_err();
    assert!(err.to_string().contains("stepsize"), "{err}");

    let err = ScenarioConfig::from_json("{ \"schema_version\": 1, ", "broken.json").unwrap_err();
    assert!(err.to_string().starts_with("broken.json:1:"), "{err}");
}

#[test]
fn schema_version_checked() {
    let mut v = bundled_json();
    v["schema_version"] = json!(2);
    assert_eq!(invalid_field(parse(&v).unwrap_err()), "schema_version");
}

#[test]
fn governor_block_optional() {
    let mut v = bundled_json();
    v.as_object_mut().unwrap().remove("governor");
    assert!(!parse(&v).unwrap().governor.enabled());
    v["governor"] = json!({ "enabled": true });
    let g = parse(&v).unwrap().governor;
    assert!(g.enabled());
    assert_eq!((g.droop_gain(), g.time_constant()), (25.0, 8.0));
}

#[test]
fn uncontrolled_initial_rocof() {
    let run = run_subcase(&short(Subcase::NoControl, false)).unwrap();
    assert!((run.metrics.initial_rocof + 0.3 / 39.2).abs() < 1e-15);
    let analytic = initial_rocof(-0.3, 39.2, 0.0);
    assert!((run.metrics.initial_rocof - analytic).abs() <= 0.02 * analytic.abs());
}

#[test]
fn added_inertia_initial_rocof() {
    let run = run_subcase(&short(Subcase::AddedInertia, false)).unwrap();
    assert!((run.metrics.initial_rocof + 0.3 / 79.2).abs() < 1e-15);
    let analytic = initial_rocof(-0.3, 39.2, 40.0);
    assert!((run.metrics.initial_rocof - analytic).abs() <= 0.02 * analytic.abs());
}

#[test]
fn metrics_with_governor_stay_near_analytic() {
    for (subcase, dtj) in [(Subcase::NoControl, 0.0), (Subcase::AddedInertia, 40.0)] {
        let run = run_subcase(&short(subcase, true)).unwrap();
        let analytic = initial_rocof(-0.3, 39.2, dtj);
        assert!((run.metrics.initial_rocof - analytic).abs() <= 0.02 * analytic.abs());
        assert!(run.metrics.nadir <= 0.0);
        assert!(run.metrics.nadir_time >= 10.0);
    }
}

#[test]
fn constant_droop_trace_starts_at_zero_on_onset() {
    let run = run_subcase(&short(Subcase::ConstantDroop, false)).unwrap();
    let on = run.trace.onset_index.unwrap();
    assert_eq!(run.trace.sample_times[on], 10.0);
    assert_eq!(run.trace.omega[on], 0.0);
}

#[test]
fn csv_round_trip_preserves_metrics() {
    let dir = tempfile::tempdir().unwrap();
    for subcase in Subcase::ALL {
        let run = run_subcase(&short(subcase, true)).unwrap();
        let path = dir.path().join(format!("{subcase}.csv"));
        emit_trace_csv(&run.trace, &path).unwrap();
        let back = read_trace_csv(&path, 10.0).unwrap();
        assert_eq!(back.omega, run.trace.omega);
        assert_eq!(back.per_ffr_power, run.trace.per_ffr_power);
        assert_eq!(back.ffr_ids, run.trace.ffr_ids);
        assert_eq!(back.onset_index, run.trace.onset_index);
        assert_eq!(SummaryMetrics::from_trace(&back).unwrap(), run.metrics);
    }
}

#[test]
fn csv_header_and_rows() {
    let run = run_subcase(&short(Subcase::Vdic, false)).unwrap();
    let mut buf = Vec::new();
    write_trace(&run.trace, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,omega,rocof,ffr_power,droop_active,p_hvdc1,p_hvdc2,p_hvdc3,p_hvdc4"
    );
    assert_eq!(lines.clone().count(), run.trace.len());
    assert!(lines.next().unwrap().starts_with("0,0,0,0,0,"));
    let onset_row = text.lines().find(|l| l.starts_with("10,")).unwrap();
    assert!(onset_row.starts_with("10,0,"), "{onset_row}");
}

#[test]
fn pre_onset_only_trace_emits_zero_rows() {
    let model = CaseStudyConfig::bundled().model;
    let event = ffr_inertia::ImbalanceEvent::new(-0.3, 10.0).unwrap();
    let cfg = ffr_inertia::SimConfig::new(0.5, 5.0, ffr_inertia::Integrator::Rk4).unwrap();
    let trace = ffr_inertia::simulate(
        &model,
        &event,
        &ffr_inertia::Controller::None,
        &ffr_inertia::GovernorSpec::disabled(),
        &cfg,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_trace(&trace, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().skip(1).all(|l| l.split(',').skip(1).all(|f| f == "0")));
}

#[test]
fn reruns_are_byte_identical() {
    let bytes = || {
        let run = run_subcase(&short(Subcase::Vdic, true)).unwrap();
        let mut buf = Vec::new();
        write_trace(&run.trace, &mut buf).unwrap();
        buf
    };
    assert_eq!(bytes(), bytes());
}

#[test]
fn case_study_rejects_mismatched_configs() {
    let base = CaseStudyConfig::bundled().with_sim_overrides(None, Some(12.0)).unwrap();
    let mut configs = base.expand();
    configs.pop();
    assert!(matches!(run_case_study(&configs), Err(ScenarioError::Inconsistent(_))));

    let mut configs = base.expand();
    configs[2] = configs[2].clone().with_sim_overrides(Some(2e-3), None).unwrap();
    let err = run_case_study(&configs).unwrap_err();
    assert!(err.to_string().contains("sim"), "{err}");

    let mut configs = base.expand();
    configs[3].event = ffr_inertia::ImbalanceEvent::new(-0.2, 10.0).unwrap();
    assert!(run_case_study(&configs).unwrap_err().to_string().contains("event"));

    let mut configs = base.expand();
    configs.push(configs[0].clone());
    assert!(run_case_study(&configs).is_err());
}

#[test]
fn case_study_outputs_share_a_grid() {
    let study = run_case_study(
        &CaseStudyConfig::bundled()
            .with_sim_overrides(Some(1e-2), Some(20.0))
            .unwrap()
            .expand(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_case_study(&study, dir.path()).unwrap();
    assert_eq!(written.len(), 6);

    let merged = std::fs::read_to_string(dir.path().join("case_study.csv")).unwrap();
    let header = merged.lines().next().unwrap();
    assert_eq!(
        header,
        "t,omega_no_control,ffr_power_no_control,omega_added_inertia,ffr_power_added_inertia,\
         omega_constant_droop,ffr_power_constant_droop,omega_vdic,ffr_power_vdic"
    );
    assert_eq!(merged.lines().count(), study.runs[0].trace.len() + 1);

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 4);
    assert!(report["metrics"]["vdic"]["initial_rocof"].is_number());
}
