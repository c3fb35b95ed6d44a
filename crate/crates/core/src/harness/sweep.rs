//! Replicated experiments and parameter sweeps.

use super::config::{ExperimentConfig, SweepAxis};
use super::report::SummaryRow;
use super::HarnessError;
use crate::mechanisms::MechanismParams;
use crate::model::BidProfile;
use crate::regret::{bound, Baseline, BoundEval, BoundInputs, ReplicationSeries, TheoremId};
use crate::simulation::{par_map, run_replication_with, RunConfig};

/// A parameter sweep over one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    pub base: ExperimentConfig,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, points: Vec<f64>, base: ExperimentConfig) -> Result<Self, HarnessError> {
        if points.is_empty() {
            return Err(HarnessError::Config("a sweep needs at least one point".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) || points.iter().any(|p| !p.is_finite()) {
            return Err(HarnessError::Config(format!("sweep points {points:?} must be finite and strictly increasing")));
        }
        for &p in &points {
            base.with_axis(axis, p)?;
        }
        Ok(Self { axis, points, base })
    }
}

/// Regret of one replication of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: u64,
    pub params: MechanismParams,
    pub revenue: f64,
    pub sw: f64,
    pub deviation: f64,
    pub theorem: Option<TheoremId>,
    pub bound: f64,
    pub warnings: Vec<String>,
}

/// Runs replication `r` of `cfg` on its own instance and measures regret.
pub fn run_replication(cfg: &ExperimentConfig, r: u64) -> Result<ReplicationOutcome, HarnessError> {
    let (env, model) = cfg.instance(r)?;
    let params = cfg.mechanism_params(&env, &model)?;
    let run = RunConfig { env, model, mechanism: params, horizon: cfg.horizon, seed: cfg.seed, replications: 1 };
    let bids = BidProfile::truthful(&run.env);
    let baseline = Baseline::new(&run.env, &bids, &run.model)?;
    let mut series = ReplicationSeries::default();
    run_replication_with(&run, r, |t| series.push(&t, &run.env, &bids, &run.model))?;

    let theorem = cfg.bound_theorem()?;
    let eval = match theorem {
        Some(id) => {
            let mut inputs = BoundInputs::for_instance(cfg.horizon, &run.env, &run.model);
            if id.mechanism().is_randomized() {
                inputs = inputs.with_mu(params.mu);
            }
            bound(id, &inputs)
        }
        None => BoundEval { value: f64::NAN, warnings: Vec::new() },
    };
    Ok(ReplicationOutcome {
        replication: r,
        params,
        revenue: series.revenue_regret(&baseline),
        sw: series.sw_regret(&baseline),
        deviation: series.deviation_regret(&baseline),
        theorem,
        bound: eval.value,
        warnings: eval.warnings,
    })
}

fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

fn rows_for(axis: &str, value: f64, seed: u64, outcomes: &[ReplicationOutcome]) -> Vec<SummaryRow> {
    let se = standard_error(&outcomes.iter().map(|o| o.revenue).collect::<Vec<_>>());
    outcomes
        .iter()
        .map(|o| SummaryRow {
            axis: axis.to_string(),
            value,
            replication: o.replication,
            rt: o.revenue,
            rt_sw: o.sw,
            rt_dev: o.deviation,
            bound: o.bound,
            relative: if o.bound > 0.0 { o.revenue / o.bound } else { f64::NAN },
            stderr: se,
            seed,
        })
        .collect()
}

/// All replications of one configuration, on the worker pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReplicationOutcome>, HarnessError> {
    par_map((0..cfg.replications).collect(), |r| run_replication(cfg, r)).into_iter().collect()
}

/// Summary rows of a single configuration, labelled with a placeholder axis.
pub fn run_summary(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>, HarnessError> {
    Ok(rows_for("none", 0.0, cfg.seed, &run_experiment(cfg)?))
}

/// Every `(point, replication)` pair of a sweep, dispatched to the worker pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SummaryRow>, HarnessError> {
    let cells: Vec<ExperimentConfig> =
        spec.points.iter().map(|&p| spec.base.with_axis(spec.axis, p)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, u64)> =
        cells.iter().enumerate().flat_map(|(i, c)| (0..c.replications).map(move |r| (i, r))).collect();
    let results = par_map(jobs, |(i, r)| run_replication(&cells[i], r).map(|o| (i, o)));
    let mut per_cell: Vec<Vec<ReplicationOutcome>> = vec![Vec::new(); cells.len()];
    for res in results {
        let (i, o) = res?;
        per_cell[i].push(o);
    }
    let mut rows = Vec::new();
    for (i, outcomes) in per_cell.iter().enumerate() {
        rows.extend(rows_for(spec.axis.name(), spec.points[i], cells[i].seed, outcomes));
    }
    Ok(rows)
}
