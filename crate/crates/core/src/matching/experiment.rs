use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frlp::Variant;
use crate::oracle::{trial_seed, z_999};

use super::audit::dual_audit_check;
use super::instance::{generate_instance, Instance, InstanceKind};
use super::offline::{maximum_matching, maximum_weight_matching};
use super::{default_limit, run_unweighted, run_weighted, unweighted_tables, weighted_tables, Mode};

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub kind: InstanceKind,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// LP range; `None` takes the variant's default.
    pub limit: Option<(usize, usize)>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub seed: u64,
    pub alg: f64,
    pub opt: f64,
    pub ratio: f64,
    pub audit_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub gamma: f64,
    pub rows: Vec<RatioRow>,
    pub mean: f64,
    pub min: f64,
    pub std_err: f64,
    /// 99.9% normal interval around the mean.
    pub ci: (f64, f64),
}

impl ExperimentReport {
    pub fn audit_failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.audit_pass).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,alg,opt,ratio,audit_pass\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.seed, r.alg, r.opt, r.ratio, r.audit_pass));
        }
        out
    }
}

/// Runs `trials` seeded trials, each on a fresh instance of `kind`, and
/// reports `ALG/OPT` per trial with its audit verdict. Trial `t` uses
/// instance seed `trial_seed(seed, t)`.
pub fn ratio_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_trials(cfg, |seed| generate_instance(cfg.kind, cfg.n, seed))
}

/// Same as [`ratio_experiment`] with every trial on `inst`; only the OCS
/// coins change between trials.
pub fn instance_experiment(inst: &Instance, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    inst.validate()?;
    run_trials(cfg, |_| inst.clone())
}

fn run_trials<F>(cfg: &ExperimentConfig, make: F) -> Result<ExperimentReport>
where
    F: Fn(u64) -> Instance + Sync,
{
    if cfg.trials == 0 {
        return Err(Error::InvalidParams("at least one trial is needed".into()));
    }
    let limit = cfg.limit.unwrap_or_else(|| default_limit(cfg.variant));
    let unweighted = match cfg.variant {
        Variant::Unweighted => Some(unweighted_tables(cfg.mode, limit)?),
        Variant::Weighted => None,
    };
    let weighted = match cfg.variant {
        Variant::Weighted => Some(weighted_tables(cfg.mode, limit)?),
        Variant::Unweighted => None,
    };
    let gamma = unweighted.as_ref().map_or_else(|| weighted.as_ref().unwrap().tables.gamma, |u| u.tables.gamma);

    let rows = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<RatioRow> {
            let seed = trial_seed(cfg.seed, t);
            let inst = make(seed);
            let run_seed = trial_seed(seed, 1);
            let (alg, opt, audit) = if let Some(u) = &unweighted {
                let inst = inst.unit_weights();
                let (out, audit) = run_unweighted(&inst, &u.order, &u.tables, run_seed)?;
                (out.value, maximum_matching(&inst) as f64, audit)
            } else {
                let w = weighted.as_ref().unwrap();
                let (out, audit) = run_weighted(&inst, &w.tables, &w.params, run_seed)?;
                (out.value, maximum_weight_matching(&inst), audit)
            };
            let ratio = if opt > 0.0 { alg / opt } else { 1.0 };
            Ok(RatioRow { seed, alg, opt, ratio, audit_pass: dual_audit_check(&audit, cfg.tol).passed() })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / n;
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let var = if rows.len() > 1 { rows.iter().map(|r| (r.ratio - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let std_err = (var / n).sqrt();
    let z = z_999();
    Ok(ExperimentReport { gamma, rows, mean, min, std_err, ci: (mean - z * std_err, mean + z * std_err) })
}
