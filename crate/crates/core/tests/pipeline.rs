use std::path::{Path, PathBuf};

use ensured::calibration::EstimateMode;
use ensured::data::{load_csv, split};
use ensured::model::Task;
use ensured::report::{cmd_global_map, explain_test_set, prepare, select_rules, RunConfig};
use ensured::triage::{feasible, RankingWeight};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn wine(out: &Path) -> RunConfig {
    let mut c = RunConfig::new(data("winequality-red.csv"), out);
    c.positive_from = Some(6.0);
    c.test_size = 30;
    c
}

fn housing(out: &Path, threshold: f64) -> RunConfig {
    let mut c = RunConfig::new(data("california_housing.csv"), out);
    c.task = Task::Regression;
    c.threshold = Some(threshold);
    c.max_rows = Some(3000);
    c.test_size = 60;
    c.trees = 50;
    c
}

#[test]
fn bundled_datasets_load() {
    let w = load_csv(data("winequality-red.csv"), "quality", Task::Regression).unwrap();
    assert_eq!((w.len(), w.n_features()), (1599, 11));
    let w = w.binarize(6.0);
    assert_eq!(w.task, Task::Classification);
    let h = load_csv(data("california_housing.csv"), "MedHouseValK", Task::Regression).unwrap();
    assert_eq!((h.len(), h.n_features()), (20640, 8));
}

#[test]
fn wine_split_sizes() {
    let w = load_csv(data("winequality-red.csv"), "quality", Task::Regression).unwrap();
    for cal in [100, 500] {
        let s = split(&w, cal, 200, 3).unwrap();
        assert_eq!(s.calibration.len(), cal);
        assert_eq!(s.test.len(), 200);
    }
    assert!(split(&w, 500, w.len() - 400, 0).is_err());
}

#[test]
fn wine_top_k_under_full_probability_weight() {
    let dir = tempfile::tempdir().unwrap();
    let c = wine(dir.path());
    let p = prepare(&c).unwrap();
    let results = explain_test_set(&p, true, c.weight).unwrap();
    let w1 = RankingWeight::new(1.0).unwrap();
    for r in results.iter().filter_map(|r| r.triaged.as_ref()) {
        let top = select_rules(r, None, false, w1, 10);
        assert_eq!(top.len(), r.len().min(10));
        let mut p_hats: Vec<f64> = r.iter().map(|t| t.p_hat).collect();
        p_hats.sort_by(|a, b| b.total_cmp(a));
        let chosen: Vec<f64> = top.iter().map(|t| t.p_hat).collect();
        assert_eq!(chosen, p_hats[..chosen.len()].to_vec());
        let all = select_rules(r, None, false, w1, 10_000);
        assert_eq!(all.len(), r.len());
    }
}

#[test]
fn housing_threshold_map_has_two_classes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = housing(dir.path(), 500.0);
    c.test_size = 400;
    let report = cmd_global_map(&c).unwrap();
    assert_eq!(report.class_labels, ["y >= 500".to_string(), "y < 500".to_string()]);
    for p in &report.points {
        assert!(feasible(p.probability, p.uncertainty, EstimateMode::Regularised));
        assert!(report.class_labels.contains(&p.predicted_class));
    }
    let above = report.points.iter().filter(|p| p.predicted_class == "y >= 500").count();
    assert!(above > 0 && above < report.points.len(), "{above}");
}

#[test]
fn housing_five_rules_at_threshold_300() {
    let dir = tempfile::tempdir().unwrap();
    let c = housing(dir.path(), 300.0);
    let p = prepare(&c).unwrap();
    let results = explain_test_set(&p, false, c.weight).unwrap();
    let r = results.iter().find_map(|r| r.triaged.as_ref().filter(|t| t.len() >= 5)).unwrap();
    assert_eq!(select_rules(r, None, false, RankingWeight::new(0.5).unwrap(), 5).len(), 5);
}

#[test]
fn empty_test_set_gives_axes_only_map() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = wine(dir.path());
    c.test_size = 0;
    let report = cmd_global_map(&c).unwrap();
    assert!(report.points.is_empty());
    let svg = std::fs::read_to_string(dir.path().join("global_map.svg")).unwrap();
    roxmltree::Document::parse(&svg).unwrap();
}
