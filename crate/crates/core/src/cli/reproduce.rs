//! The end-to-end pipeline behind `zilm reproduce`.

use std::path::Path;

use crate::domain::io::{write_dataset, DATASET_FILES};
use crate::domain::SplitSelector;
use crate::error::Result;
use crate::eval::{
    classification_metrics, contrast_analysis, forced_delivery_experiment, metrics_csv, policy_experiment,
    recovery_csv, recovery_report, rows_to_csv, MetricsReport, Partition, Policy, RecoveryReport,
};
use crate::fit::{fit, FitConfig, FittedModel, MODEL_FILE, TRACE_FILE};
use crate::models::ModelKind;
use crate::simulate::{generate_dataset, SimConfig};

use super::{digest_bytes, to_json, RunManifest, Staging};

/// Cohort size used by `--quick`.
pub const QUICK_STUDENTS: usize = 500;
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Copy, Default)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub quick: bool,
    pub force: bool,
}

impl ReproduceOptions {
    pub fn sim_config(&self) -> SimConfig {
        let mut cfg = SimConfig { seed: self.seed, ..SimConfig::default() };
        if self.quick {
            cfg.n_students = QUICK_STUDENTS;
        }
        cfg
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig { seed: self.seed, ..FitConfig::default() }
    }
}

/// Simulates a cohort, fits every model kind, writes every report and a
/// one-row-per-model summary into `out`.
///
/// Layout: `dataset/`, `models/<kind>/`, `reports/`, `summary.csv`.
pub fn reproduce(out: &Path, opts: &ReproduceOptions) -> Result<RunManifest> {
    let sim_cfg = opts.sim_config();
    let fit_cfg = opts.fit_config();
    sim_cfg.validate().map_err(|e| e.in_stage("simulate"))?;
    fit_cfg.validate().map_err(|e| e.in_stage("fit"))?;
    let digest_input = serde_json::json!({ "simulate": sim_cfg.to_json_value(), "fit": &fit_cfg });
    let digest = digest_bytes(&serde_json::to_vec(&digest_input).expect("config serializes"));

    let mut staging = Staging::new(out, opts.force)?;

    let d = generate_dataset(&sim_cfg).map_err(|e| e.in_stage("simulate"))?;
    write_dataset(&staging.join("dataset"), &d, Some(sim_cfg.to_json_value())).map_err(|e| e.in_stage("simulate"))?;
    for f in DATASET_FILES {
        staging.record(&format!("dataset/{f}"));
    }

    let mut models: Vec<FittedModel> = Vec::new();
    for kind in ModelKind::ALL {
        let stage = format!("fit {kind}");
        let m = fit(&d, kind, &fit_cfg).map_err(|e| e.in_stage(&stage))?;
        let dir = format!("models/{kind}");
        m.save(&staging.join(&dir)).map_err(|e| e.in_stage(&stage))?;
        staging.record(&format!("{dir}/{MODEL_FILE}"));
        staging.record(&format!("{dir}/{TRACE_FILE}"));
        models.push(m);
    }

    let metrics = models
        .iter()
        .map(|m| classification_metrics(m, &d, SplitSelector::Test))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("metrics"))?;
    staging.write("reports/metrics.json", to_json(&metrics))?;
    staging.write("reports/metrics.csv", metrics_csv(&metrics))?;

    let recovery = models
        .iter()
        .map(|m| recovery_report(m, &d))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("recovery"))?;
    staging.write("reports/recovery.json", to_json(&recovery))?;
    staging.write("reports/recovery.csv", recovery_csv(&recovery))?;

    for p in Partition::ALL {
        let r = contrast_analysis(&d, p).map_err(|e| e.in_stage("contrast"))?;
        staging.write(&format!("reports/contrast_{p}.json"), to_json(&r))?;
        staging.write(&format!("reports/contrast_{p}.csv"), r.to_csv())?;
    }

    let delivery = forced_delivery_experiment(&sim_cfg).map_err(|e| e.in_stage("delivery"))?;
    staging.write("reports/delivery.json", to_json(&delivery))?;
    staging.write("reports/delivery.csv", delivery.to_csv())?;

    let zilm = models.iter().find(|m| m.kind == ModelKind::IrtZilm).expect("irt_zilm was fitted");
    for policy in [Policy::Random, Policy::OracleActive, Policy::OracleAdversarial, Policy::ModelActive(zilm)] {
        let stage = format!("policy {}", policy.token());
        let r = policy_experiment(&sim_cfg, policy).map_err(|e| e.in_stage(&stage))?;
        staging.write(&format!("reports/policy_{}.json", policy.token()), to_json(&r))?;
        staging.write(&format!("reports/policy_{}.csv", policy.token()), r.to_csv())?;
    }

    staging.write(SUMMARY_FILE, summary_csv(&metrics, &recovery))?;
    staging.commit("reproduce", digest, Some(opts.seed))
}

/// One row per model joining held-out metrics with parameter recovery.
pub fn summary_csv(metrics: &[MetricsReport], recovery: &[RecoveryReport]) -> String {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut rows = vec![[
        "model",
        "accuracy",
        "f1",
        "nll",
        "brier",
        "ability_pearson",
        "ability_spearman",
        "difficulty_pearson",
        "difficulty_spearman",
        "discrimination_pearson",
        "discrimination_spearman",
        "nd_ability_bias",
    ]
    .map(String::from)
    .to_vec()];
    for m in metrics {
        let r = recovery.iter().find(|r| r.model == m.model);
        let disc = r.and_then(|r| r.discrimination);
        rows.push(vec![
            m.model.to_string(),
            fmt(Some(m.accuracy)),
            fmt(Some(m.f1)),
            fmt(Some(m.nll)),
            fmt(Some(m.brier)),
            fmt(r.map(|r| r.ability.pearson)),
            fmt(r.map(|r| r.ability.spearman)),
            fmt(r.map(|r| r.difficulty.pearson)),
            fmt(r.map(|r| r.difficulty.spearman)),
            fmt(disc.map(|c| c.pearson)),
            fmt(disc.map(|c| c.spearman)),
            fmt(r.and_then(|r| r.nd_bias())),
        ]);
    }
    rows_to_csv(&rows)
}
