//! Regret metrics, closed-form regret bounds and their parameter tuners.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mechanisms::{vcg_expected_payments, MechanismKind};
use crate::model::{welfare_unchecked, AuctionEnv, BidProfile, CascadeModel};
use crate::simulation::RoundTrace;

/// Oracle VCG quantities every regret is measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub payments: Vec<f64>,
    pub revenue: f64,
    pub welfare: f64,
}

impl Baseline {
    pub fn new(env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel) -> Result<Self> {
        let payments = vcg_expected_payments(env, bids, model)?;
        let theta = crate::allocation::optimal_allocation(env, bids, env.qualities(), model)?;
        let welfare = welfare_unchecked(&theta, model, env.qualities(), bids.as_slice());
        Ok(Self { revenue: payments.iter().sum(), payments, welfare })
    }
}

/// Per-round revenue and welfare of one replication.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplicationSeries {
    pub revenue: Vec<f64>,
    pub welfare: Vec<f64>,
}

impl ReplicationSeries {
    /// Appends one round: expected revenue and true welfare of its allocation.
    pub fn push(&mut self, trace: &RoundTrace, env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel) {
        self.revenue.push(trace.expected_payments.iter().sum());
        self.welfare.push(welfare_unchecked(&trace.allocation, model, env.qualities(), bids.as_slice()));
    }

    pub fn revenue_regret(&self, baseline: &Baseline) -> f64 {
        self.revenue.iter().map(|r| baseline.revenue - r).sum()
    }

    pub fn sw_regret(&self, baseline: &Baseline) -> f64 {
        self.welfare.iter().map(|w| baseline.welfare - w).sum()
    }

    pub fn deviation_regret(&self, baseline: &Baseline) -> f64 {
        self.revenue.iter().map(|r| (baseline.revenue - r).abs()).sum()
    }
}

/// Regret of a mechanism over one or more replications.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    /// Replication-averaged `sum_i p*_i - sum_i p_{i,t}`.
    pub per_round_revenue_regret: Vec<f64>,
    /// Mean cumulative revenue regret.
    pub revenue: f64,
    pub revenue_se: f64,
    /// Mean cumulative social-welfare regret.
    pub sw: f64,
    pub sw_se: f64,
    /// `sum_t |per_round_revenue_regret_t|`.
    pub deviation: f64,
    pub replications: usize,
    pub bound_id: Option<TheoremId>,
    pub bound: f64,
    /// `revenue / bound`, NaN without a positive bound.
    pub relative: f64,
    pub warnings: Vec<String>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl RegretReport {
    pub fn from_series(baseline: &Baseline, series: &[ReplicationSeries]) -> Self {
        let reps = series.len();
        let rounds = series.iter().map(|s| s.revenue.len()).max().unwrap_or(0);
        let mut per_round = vec![0.0; rounds];
        for s in series {
            for (acc, r) in per_round.iter_mut().zip(&s.revenue) {
                *acc += baseline.revenue - r;
            }
        }
        if reps > 0 {
            per_round.iter_mut().for_each(|x| *x /= reps as f64);
        }
        let rev: Vec<f64> = series.iter().map(|s| s.revenue_regret(baseline)).collect();
        let sw: Vec<f64> = series.iter().map(|s| s.sw_regret(baseline)).collect();
        let (revenue, revenue_se) = mean_se(&rev);
        let (sw, sw_se) = mean_se(&sw);
        Self {
            deviation: per_round.iter().map(|x| x.abs()).sum(),
            per_round_revenue_regret: per_round,
            revenue,
            revenue_se,
            sw,
            sw_se,
            replications: reps,
            bound_id: None,
            bound: f64::NAN,
            relative: f64::NAN,
            warnings: Vec::new(),
        }
    }

    /// Attaches a bound and fills in the relative regret.
    pub fn with_bound(mut self, id: TheoremId, eval: BoundEval) -> Self {
        self.bound_id = Some(id);
        self.bound = eval.value;
        self.relative = if eval.value > 0.0 { self.revenue / eval.value } else { f64::NAN };
        self.warnings.extend(eval.warnings);
        self
    }
}

fn series_of(
    traces: &[Vec<RoundTrace>],
    env: &AuctionEnv,
    bids: &BidProfile,
    model: &CascadeModel,
) -> Result<(Baseline, Vec<ReplicationSeries>)> {
    let baseline = Baseline::new(env, bids, model)?;
    let series = traces
        .iter()
        .map(|rep| {
            let mut s = ReplicationSeries::default();
            for t in rep {
                s.push(t, env, bids, model);
            }
            s
        })
        .collect();
    Ok((baseline, series))
}

/// Revenue regret report of a set of replications (no bound attached).
pub fn revenue_regret(
    traces: &[Vec<RoundTrace>],
    env: &AuctionEnv,
    bids: &BidProfile,
    model: &CascadeModel,
) -> Result<RegretReport> {
    let (baseline, series) = series_of(traces, env, bids, model)?;
    Ok(RegretReport::from_series(&baseline, &series))
}

/// Mean cumulative welfare shortfall against the optimal allocation.
pub fn sw_regret(traces: &[Vec<RoundTrace>], env: &AuctionEnv, bids: &BidProfile, model: &CascadeModel) -> Result<f64> {
    Ok(revenue_regret(traces, env, bids, model)?.sw)
}

/// `sum_t |sum_i (p*_i - p_{i,t})|` on replication-averaged payments.
pub fn deviation_regret(
    traces: &[Vec<RoundTrace>],
    env: &AuctionEnv,
    bids: &BidProfile,
    model: &CascadeModel,
) -> Result<f64> {
    Ok(revenue_regret(traces, env, bids, model)?.deviation)
}

/// Closed-form regret bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// A-VCG1 revenue regret.
    T1,
    /// A-VCG1 social-welfare regret.
    T2,
    /// A-VCG2' revenue regret.
    T4,
    /// A-VCG2' social-welfare regret.
    T5,
    /// A-VCG3 revenue regret.
    T7,
    /// A-VCG3 social-welfare regret.
    T7Sw,
    /// PAD-A-VCG revenue regret.
    T8,
    /// PAD-A-VCG social-welfare regret.
    T9,
    /// A-VCG1 deviation regret.
    T11,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        Self::T1,
        Self::T2,
        Self::T4,
        Self::T5,
        Self::T7,
        Self::T7Sw,
        Self::T8,
        Self::T9,
        Self::T11,
    ];

    pub fn mechanism(self) -> MechanismKind {
        match self {
            Self::T1 | Self::T2 | Self::T11 => MechanismKind::Avcg1,
            Self::T4 | Self::T5 => MechanismKind::Avcg2Prime,
            Self::T7 | Self::T7Sw => MechanismKind::Avcg3,
            Self::T8 | Self::T9 => MechanismKind::PadAvcg,
        }
    }

    /// Revenue-regret theorem of a mechanism, if one exists.
    pub fn revenue_for(kind: MechanismKind) -> Option<Self> {
        match kind {
            MechanismKind::Avcg1 => Some(Self::T1),
            MechanismKind::Avcg2Prime => Some(Self::T4),
            MechanismKind::Avcg3 => Some(Self::T7),
            MechanismKind::PadAvcg => Some(Self::T8),
            MechanismKind::OracleVcg | MechanismKind::Avcg2 => None,
        }
    }

    fn long_name(self) -> &'static str {
        match self {
            Self::T1 => "T1_AVCG1_rev",
            Self::T2 => "T2_AVCG1_sw",
            Self::T4 => "T4_AVCG2p_rev",
            Self::T5 => "T5_AVCG2p_sw",
            Self::T7 => "T7_AVCG3_rev",
            Self::T7Sw => "T7sw_AVCG3_sw",
            Self::T8 => "T8_PAD_rev",
            Self::T9 => "T9_PAD_sw",
            Self::T11 => "T11_deviation",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let long = self.long_name();
        f.write_str(&long[..long.find('_').unwrap_or(long.len())])
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|id| lower == id.to_string().to_ascii_lowercase() || lower == id.long_name().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown theorem id {s:?}")))
    }
}

/// Instance parameters entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub horizon: f64,
    pub n_slots: f64,
    pub n_ads: f64,
    pub v_max: f64,
    /// `Lambda_min` for position-dependent theorems, `Gamma_min` otherwise.
    pub prominence_min: f64,
    pub q_min: f64,
    /// Resampling probability; `None` means the tuned `T^-mu_exponent`.
    pub mu: Option<f64>,
    pub mu_exponent: f64,
}

impl BoundInputs {
    pub fn new(horizon: u64, n_slots: usize, n_ads: usize) -> Self {
        Self {
            horizon: horizon as f64,
            n_slots: n_slots as f64,
            n_ads: n_ads as f64,
            v_max: 1.0,
            prominence_min: 1.0,
            q_min: 1.0,
            mu: None,
            mu_exponent: 1.5,
        }
    }

    /// Inputs read off a concrete instance.
    pub fn for_instance(horizon: u64, env: &AuctionEnv, model: &CascadeModel) -> Self {
        Self {
            v_max: env.v_max(),
            prominence_min: model.gamma_min(env.n_ads()),
            q_min: env.q_min(),
            ..Self::new(horizon, env.n_slots(), env.n_ads())
        }
    }

    pub fn with_v_max(mut self, v: f64) -> Self {
        self.v_max = v;
        self
    }

    pub fn with_prominence_min(mut self, p: f64) -> Self {
        self.prominence_min = p;
        self
    }

    pub fn with_q_min(mut self, q: f64) -> Self {
        self.q_min = q;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    fn mu_or_default(&self) -> f64 {
        self.mu.unwrap_or_else(|| self.horizon.powf(-self.mu_exponent))
    }
}

/// A bound value with any violated preconditions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEval {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// Tuned mechanism parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub tau: u64,
    pub delta: f64,
    pub mu: Option<f64>,
    pub warnings: Vec<String>,
}

fn pad_scale(gamma_min: f64) -> f64 {
    5.0 / (2f64.sqrt() * gamma_min)
}

fn log_cbrt(arg: f64, what: &str, warnings: &mut Vec<String>) -> f64 {
    if arg < 1.0 {
        warnings.push(format!("{what}: log argument {arg} < 1"));
    }
    arg.ln().cbrt()
}

/// Evaluates a theorem's closed-form bound.
pub fn bound(id: TheoremId, x: &BoundInputs) -> BoundEval {
    let BoundInputs { horizon: t, n_slots: k, n_ads: n, v_max: v, prominence_min: p, q_min, .. } = *x;
    let mut w = Vec::new();
    let name = id.to_string();
    if !(p > 0.0 && p <= 1.0) {
        w.push(format!("{name}: minimum prominence {p} outside (0, 1]"));
    }
    let c = |e: f64| e.cbrt();
    let two3 = 2f64.cbrt();
    let value = match id {
        TheoremId::T1 => {
            if t <= n / k {
                w.push(format!("{name}: requires T > N/K"));
            }
            4.0 * two3 * v * p.powf(-2.0 / 3.0) * (k * t).powf(2.0 / 3.0) * c(n)
                * log_cbrt(c(k * t) * c(n * n), &name, &mut w)
        }
        TheoremId::T2 | TheoremId::T9 => {
            let s = (2f64.sqrt() / p).powf(2.0 / 3.0);
            let inner = if id == TheoremId::T2 { p.powf(2.0 / 3.0) } else { p.powf(-2.0 / 3.0) };
            let arg = two3 * two3 * inner * c(n * n) * c(k) * c(t);
            4.0 * v * s * k.powf(2.0 / 3.0) * c(n) * t.powf(2.0 / 3.0) * log_cbrt(arg, &name, &mut w)
        }
        TheoremId::T4 => 2.0 * k * k * x.mu_or_default() * v * t,
        TheoremId::T5 => k * k * x.mu_or_default() * v * t,
        TheoremId::T7 => {
            if t < n {
                w.push(format!("{name}: requires T >= N"));
            }
            6.0 * v * k * t.powf(2.0 / 3.0) * c(n) * log_cbrt(2.0 * c(n * n) * c(t), &name, &mut w)
        }
        TheoremId::T7Sw => 5.0 * v * k * c(n) * t.powf(2.0 / 3.0) * log_cbrt(c(n * n) * c(t), &name, &mut w),
        TheoremId::T8 => {
            let d = pad_scale(p);
            if t < k * n * d * d {
                w.push(format!("{name}: requires T >= K N (5 / (sqrt 2 Gamma_min))^2"));
            }
            if q_min <= 0.0 {
                w.push(format!("{name}: q_min must be positive"));
            }
            let d23 = d.powf(2.0 / 3.0);
            4.0 * v * k.powf(4.0 / 3.0) * t.powf(2.0 / 3.0) * c(n) * d23 / q_min
                * log_cbrt(c(n * n) * c(t) / (c(k) * d23), &name, &mut w)
        }
        TheoremId::T11 => {
            if t <= n / k {
                w.push(format!("{name}: requires T > N/K"));
            }
            if q_min <= 0.0 {
                w.push(format!("{name}: q_min must be positive"));
            }
            v * 4.0 * two3 * c(n) * t.powf(2.0 / 3.0) / (c(k) * q_min * p.powf(2.0 / 3.0))
                * log_cbrt(c(n * n) * c(k) * c(t), &name, &mut w)
        }
    };
    BoundEval { value, warnings: w }
}

fn clamp_delta(delta: f64, name: &str, warnings: &mut Vec<String>) -> f64 {
    if delta > 1.0 {
        warnings.push(format!("{name}: delta = {delta} exceeds 1, clamped"));
        1.0
    } else {
        delta
    }
}

/// Closed-form exploration length, confidence and resampling probability.
pub fn tune(id: TheoremId, x: &BoundInputs) -> Result<Tuning> {
    let BoundInputs { horizon: t, n_slots: k, n_ads: n, prominence_min: p, .. } = *x;
    let name = id.to_string();
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Infeasible(format!("{name}: minimum prominence {p} outside (0, 1]")));
    }
    let c = |e: f64| e.cbrt();
    let mut w = Vec::new();
    let (tau, delta, mu, floor) = match id {
        TheoremId::T1 | TheoremId::T11 => {
            if t <= n / k {
                return Err(Error::Infeasible(format!("{name}: requires T > N/K")));
            }
            let delta = c(n / (k * t));
            let log = if id == TheoremId::T1 { (c(k * t) * c(n * n)).ln() } else { (n / delta).ln() };
            let tau = c(2.0 / k) * t.powf(2.0 / 3.0) * c(n) * p.powf(-2.0 / 3.0) * log.cbrt();
            (tau, delta, None, (n / k).ceil())
        }
        TheoremId::T2 | TheoremId::T9 => {
            let s = (2f64.sqrt() / p).powf(2.0 / 3.0);
            let delta = clamp_delta(s * c(n / (k * t)), &name, &mut w);
            let log = if id == TheoremId::T2 {
                (2f64.powf(2.0 / 3.0) * p.powf(2.0 / 3.0) * c(n * n) * c(k) * c(t)).ln()
            } else {
                (2.0 * n / delta).ln()
            };
            let tau = s * t.powf(2.0 / 3.0) * c(n / k) * log.cbrt();
            (tau, delta, None, (n / k).ceil())
        }
        TheoremId::T4 | TheoremId::T5 => (0.0, 0.0, Some(x.mu_or_default()), 0.0),
        TheoremId::T7 | TheoremId::T7Sw => {
            if t < n {
                return Err(Error::Infeasible(format!("{name}: requires T >= N")));
            }
            let mu = if id == TheoremId::T7 { c(1.0 / (n * n * t)) } else { c(n / t) / k };
            if mu > 1.0 {
                return Err(Error::Infeasible(format!("{name}: requires T > N / K^3 so that mu <= 1")));
            }
            let delta = c(n / t);
            let tau = t.powf(2.0 / 3.0) * c(n) * (2.0 * n / delta).ln().cbrt();
            (tau, delta, Some(mu), n)
        }
        TheoremId::T8 => {
            let d = pad_scale(p);
            if t < k * n * d * d {
                return Err(Error::Infeasible(format!(
                    "{name}: requires T >= K N (5 / (sqrt 2 Gamma_min))^2 = {}",
                    k * n * d * d
                )));
            }
            let d23 = d.powf(2.0 / 3.0);
            let delta = c(k * n / t) * d23;
            let tau = d23 * c(k) * t.powf(2.0 / 3.0) * c(n) * (n / delta).ln().cbrt();
            (tau, delta, None, (n / k).ceil())
        }
    };
    let tau = tau.ceil().max(floor);
    if tau > t {
        return Err(Error::Infeasible(format!("{name}: exploration length {tau} exceeds horizon {t}")));
    }
    Ok(Tuning { tau: tau as u64, delta, mu, warnings: w })
}
