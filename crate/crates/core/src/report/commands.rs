use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::json::{FeatureValue, GlobalMapReport, InstanceReport, MapPoint, PredictionReport, RuleReport, SCHEMA_VERSION};
use super::plots::{bars_svg, global_map_svg, heatmap_svg, rank_scatter_svg};
use super::summary::{RuleSet, SummaryRow, SummaryTable};
use super::{RuleFilter, RunConfig};
use crate::data::{format_number, load_csv, split, DataSplit, Dataset};
use crate::explainer::{CalibratedExplainer, Explanation, ExplanationMode};
use crate::model::{load_external_scores, train_forest, ForestParams, Task};
use crate::triage::{filter_category, filter_ensured, rank_rules, triage_explanation, CategoryKind, RankingWeight, TriagedRule};
use crate::{Error, Result};

/// A split dataset and an explainer calibrated on its calibration part.
pub struct Prepared {
    pub split: DataSplit,
    pub explainer: CalibratedExplainer,
}

fn last_column(path: &Path) -> Result<String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: 1,
        message: e.to_string(),
    })?;
    headers
        .iter()
        .next_back()
        .map(str::to_string)
        .ok_or_else(|| Error::Config(format!("{}: empty header", path.display())))
}

fn load(config: &RunConfig) -> Result<Dataset> {
    let target = match &config.target {
        Some(t) => t.clone(),
        None => last_column(&config.dataset)?,
    };
    let ds = match config.positive_from {
        Some(cut) => load_csv(&config.dataset, &target, Task::Regression)?.binarize(cut),
        None => load_csv(&config.dataset, &target, config.task)?,
    };
    Ok(match config.max_rows {
        Some(n) => ds.subsample(n, config.seed),
        None => ds,
    })
}

/// Loads, splits, fits the model and calibrates the explainer.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let mode = config.mode()?;
    let dataset = load(config)?;
    let split = split(&dataset, config.cal_size, config.test_size, config.seed)?;
    let model = match &config.scores {
        Some(path) => load_external_scores(path, config.task)?,
        None => {
            let params = ForestParams {
                n_trees: config.trees,
                rng_seed: config.seed,
                ..ForestParams::default()
            };
            train_forest(&split.proper_training, &params, config.task)?
        }
    };
    let explainer = CalibratedExplainer::new(model, &split.calibration, mode)?;
    Ok(Prepared { split, explainer })
}

/// An alternative explanation with its triage, when the taxonomy applies.
#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub explanation: Explanation,
    pub triaged: Option<Vec<TriagedRule>>,
}

/// Explains every test instance, in test-set order.
pub fn explain_test_set(prepared: &Prepared, conjunctions: bool, w: RankingWeight) -> Result<Vec<InstanceResult>> {
    let ex = &prepared.explainer;
    let instances: Vec<_> = prepared.split.test.instances().collect();
    instances
        .par_iter()
        .map(|x| {
            let mut e = ex.explain_alternatives(x)?;
            if conjunctions {
                e = ex.add_conjunctions(e, 2)?;
            }
            let triaged = if e.mode.is_probabilistic() && e.estimate != 0.5 {
                Some(triage_explanation(&e, w)?)
            } else {
                None
            };
            Ok(InstanceResult { explanation: e, triaged })
        })
        .collect()
}

/// The filter, then the `top_k` best under `w`.
pub fn select_rules(rules: &[TriagedRule], filter: Option<RuleFilter>, include_potential: bool, w: RankingWeight, top_k: usize) -> Vec<TriagedRule> {
    let pool = match filter {
        None => rules.to_vec(),
        Some(RuleFilter::Ensured) => filter_ensured(rules),
        Some(RuleFilter::Counter) => filter_category(rules, CategoryKind::Counter, include_potential),
        Some(RuleFilter::Semi) => filter_category(rules, CategoryKind::Semi, include_potential),
        Some(RuleFilter::Super) => filter_category(rules, CategoryKind::Super, include_potential),
    };
    rank_rules(&pool, w, top_k)
}

fn class_labels(mode: ExplanationMode) -> [String; 2] {
    match mode {
        ExplanationMode::RegressionThreshold { threshold } => {
            let t = format_number(threshold);
            [format!("y >= {t}"), format!("y < {t}")]
        }
        _ => ["negative".into(), "positive".into()],
    }
}

fn predicted_class(mode: ExplanationMode, estimate: f64) -> Option<String> {
    if !mode.is_probabilistic() || estimate == 0.5 {
        return None;
    }
    Some(class_labels(mode)[usize::from(estimate > 0.5)].clone())
}

fn instance_report(prepared: &Prepared, result: &InstanceResult, config: &RunConfig) -> InstanceReport {
    let e = &result.explanation;
    let schema = prepared.explainer.schema();
    let original_u = e.uncertainty();
    let rules = e
        .rules
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let t = result.triaged.as_ref().map(|t| &t[index]);
            RuleReport {
                index,
                condition: r.condition.describe(schema),
                conjunctive: r.is_conjunctive,
                estimate: r.estimate,
                low: r.low,
                high: r.high,
                uncertainty: r.uncertainty(),
                ensured: r.uncertainty() < original_u,
                category: t.map(|t| t.category),
                p_hat: t.map(|t| t.p_hat),
                rank: t.map(|t| t.rank),
            }
        })
        .collect();
    let selected = result
        .triaged
        .as_ref()
        .map(|t| {
            select_rules(t, config.filter, config.include_potential, config.weight, config.top_k)
                .iter()
                .map(|r| r.index)
                .collect()
        })
        .unwrap_or_default();
    InstanceReport {
        schema_version: SCHEMA_VERSION,
        instance_id: e.instance.id.unwrap_or_default(),
        features: e
            .instance
            .values
            .iter()
            .enumerate()
            .map(|(f, &v)| FeatureValue {
                name: schema.names[f].clone(),
                value: schema.format_value(f, v),
            })
            .collect(),
        mode: e.mode,
        prediction: PredictionReport {
            estimate: e.estimate,
            low: e.low,
            high: e.high,
            uncertainty: original_u,
        },
        predicted_class: predicted_class(e.mode, e.estimate),
        rules,
        selected,
    }
}

/// What `explain` did.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainLog {
    pub instances: usize,
    pub mean_rules: f64,
    pub files: Vec<PathBuf>,
}

/// Writes `explanations/<id>.json` for every test instance.
pub fn cmd_explain(config: &RunConfig) -> Result<ExplainLog> {
    let prepared = prepare(config)?;
    let results = explain_test_set(&prepared, config.conjunctions, config.weight)?;
    let dir = config.out_dir.join("explanations");
    let mut files = Vec::new();
    if config.formats.json {
        fs::create_dir_all(&dir)?;
        for r in &results {
            let report = instance_report(&prepared, r, config);
            let path = dir.join(format!("{}.json", report.instance_id));
            fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
            files.push(path);
        }
    }
    let total: usize = results.iter().map(|r| r.explanation.rules.len()).sum();
    Ok(ExplainLog {
        instances: results.len(),
        mean_rules: total as f64 / results.len().max(1) as f64,
        files,
    })
}

/// Category counts per test instance, written to `summary.csv`. Instances
/// predicted at exactly 0.5 have no taxonomy and are left out.
pub fn cmd_summary(config: &RunConfig) -> Result<SummaryTable> {
    if !config.mode()?.is_probabilistic() {
        return Err(Error::NotProbabilistic);
    }
    let prepared = prepare(config)?;
    let results = explain_test_set(&prepared, config.conjunctions, config.weight)?;
    let per_instance: Vec<Vec<TriagedRule>> = results.into_iter().filter_map(|r| r.triaged).collect();
    let mut table = SummaryTable {
        rows: vec![SummaryRow::from_instances(&per_instance, RuleSet::Single, config.cal_size, config.seed)],
    };
    if config.conjunctions {
        table.rows.push(SummaryRow::from_instances(
            &per_instance,
            RuleSet::Conjunctive,
            config.cal_size,
            config.seed,
        ));
    }
    if config.formats.csv {
        fs::create_dir_all(&config.out_dir)?;
        table.write_csv(config.out_dir.join("summary.csv"))?;
    }
    Ok(table)
}

/// Probability and uncertainty of every test instance, written to
/// `global_map.json` and `global_map.svg`. Works with external scores.
pub fn cmd_global_map(config: &RunConfig) -> Result<GlobalMapReport> {
    let mode = config.mode()?;
    if !mode.is_probabilistic() {
        return Err(Error::NotProbabilistic);
    }
    let prepared = prepare(config)?;
    let labels = class_labels(mode);
    let instances: Vec<_> = prepared.split.test.instances().collect();
    let points = instances
        .par_iter()
        .map(|x| {
            let p = prepared.explainer.predict(x)?;
            Ok(MapPoint {
                id: x.id.unwrap_or_default(),
                probability: p.estimate,
                uncertainty: p.uncertainty(),
                predicted_class: labels[usize::from(p.estimate > 0.5)].clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = GlobalMapReport {
        schema_version: SCHEMA_VERSION,
        mode,
        class_labels: labels,
        points,
    };
    fs::create_dir_all(&config.out_dir)?;
    if config.formats.json {
        fs::write(
            config.out_dir.join("global_map.json"),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
    }
    if config.formats.svg {
        svg::save(config.out_dir.join("global_map.svg"), &global_map_svg(&report))?;
    }
    Ok(report)
}

/// Scatter and bar chart of the selected rules of one test instance,
/// written to `rank_<id>.svg` and `bars_<id>.svg`.
pub fn cmd_rank_plot(config: &RunConfig, instance_id: u64) -> Result<Vec<PathBuf>> {
    if !config.mode()?.is_probabilistic() {
        return Err(Error::NotProbabilistic);
    }
    let prepared = prepare(config)?;
    let row = prepared
        .split
        .test
        .row_of_id(instance_id)
        .ok_or(Error::UnknownInstance(instance_id))?;
    let ex = &prepared.explainer;
    let mut e = ex.explain_alternatives(&prepared.split.test.instance(row))?;
    if config.conjunctions {
        e = ex.add_conjunctions(e, 2)?;
    }
    let triaged = triage_explanation(&e, config.weight)?;
    let selected = select_rules(&triaged, config.filter, config.include_potential, config.weight, config.top_k);
    let title = format!("Instance {instance_id}");
    let rows: Vec<(String, TriagedRule)> = selected
        .iter()
        .map(|r| (r.rule.condition.describe(ex.schema()), r.clone()))
        .collect();
    let mut files = Vec::new();
    if config.formats.svg {
        fs::create_dir_all(&config.out_dir)?;
        let scatter = config.out_dir.join(format!("rank_{instance_id}.svg"));
        svg::save(&scatter, &rank_scatter_svg(e.prediction(), &triaged, &selected, &title))?;
        let bars = config.out_dir.join(format!("bars_{instance_id}.svg"));
        svg::save(&bars, &bars_svg(e.prediction(), &rows, &title))?;
        files.extend([scatter, bars]);
    }
    Ok(files)
}

/// Writes `heatmap_w<W>.svg`.
pub fn cmd_region_heatmap(w: RankingWeight, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("heatmap_w{}.svg", w.value()));
    svg::save(&path, &heatmap_svg(w))?;
    Ok(path)
}
