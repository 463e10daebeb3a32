use heat_adequacy::adequacy::ModelKind;
use heat_adequacy::workbench::study::ErrorReport;
use heat_adequacy::workbench::{run_study, run_study_to_dir, DataFiles, DataSource, StudyConfig, SyntheticSpec};

fn small_config() -> StudyConfig {
    let mut c = StudyConfig::synthetic_default();
    c.data = DataSource::Synthetic(SyntheticSpec {
        n_winters: 4,
        training_winters: 3,
        cells: 3,
        ..SyntheticSpec::default()
    });
    c.heat.profiles = vec!["central".into()];
    c.heat.cops = vec![2.0];
    c.adequacy.peak_trials = 200;
    c
}

#[test]
fn repeated_runs_render_identical_bundles() {
    let c = small_config();
    let a = run_study(&c).unwrap();
    let b = run_study(&c).unwrap();
    assert_eq!(a.files, b.files);
    assert!(a.files.contains_key("manifest.json"));
}

#[test]
fn seed_changes_the_outputs() {
    let mut c = small_config();
    let a = run_study(&c).unwrap();
    c.seed += 1;
    let b = run_study(&c).unwrap();
    assert_ne!(a.digest, b.digest);
    assert_ne!(a.files["adequacy/summary.csv"], b.files["adequacy/summary.csv"]);
}

#[test]
fn zero_uptake_reproduces_the_baseline() {
    let mut c = small_config();
    c.heat.uptake = Some(0.0);
    let r = run_study(&c).unwrap();
    let s = &r.scenarios;
    let base = s.cells.iter().find(|c| c.kind == ModelKind::Baseline).and_then(|c| c.report.as_ref()).unwrap();
    let explicit = s.report(ModelKind::Explicit, "central", 2.0).unwrap();
    let implicit = s.report(ModelKind::Implicit, "central", 2.0).unwrap();
    assert!((explicit.acts_gw - base.acts_gw).abs() < 1e-6);
    assert!((implicit.acts_gw - base.acts_gw).abs() < 1e-6);
    assert!(implicit.bias_gw.unwrap().abs() < 1e-6);
}

#[test]
fn stamped_outputs_carry_digest_and_seed() {
    let r = run_study(&small_config()).unwrap();
    for (name, bytes) in &r.files {
        let text = String::from_utf8_lossy(bytes);
        if name.ends_with(".csv") {
            assert!(text.starts_with(&format!("# config_digest={}, seed={}", r.digest, r.seed)), "{name}");
        } else if name.ends_with(".json") && name != "config.json" && name != "study.json" {
            assert!(text.contains(&r.digest), "{name}");
        }
    }
}

#[test]
fn missing_inputs_leave_only_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.data = DataSource::Files(DataFiles {
        grid: "nope/grid.csv".into(),
        population_weights: "nope/p.csv".into(),
        onshore_weights: "nope/on.csv".into(),
        offshore_weights: "nope/off.csv".into(),
        solar_weights: "nope/s.csv".into(),
        onshore_curve: None,
        offshore_curve: None,
        demand: "nope/demand.csv".into(),
        gas: "nope/gas.csv".into(),
        renewables: None,
        demand_adjustment: None,
    });
    c.base_dir = dir.path().to_path_buf();
    let out = dir.path().join("out");
    let err = run_study_to_dir(&c, &out).unwrap_err();
    let names: Vec<_> = walk(&out);
    assert_eq!(names, vec!["diagnostics/error.json".to_string()]);
    let report: ErrorReport =
        serde_json::from_slice(&std::fs::read(out.join("diagnostics/error.json")).unwrap()).unwrap();
    assert_eq!(report.exit_code, err.exit_code());
    assert_eq!(report.stage.as_deref(), Some("inputs"));
}

#[test]
fn invalid_config_is_a_validation_error() {
    let mut c = small_config();
    c.heat.cops = vec![-1.0];
    let err = run_study(&c).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

fn walk(root: &std::path::Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out.sort();
    out
}
