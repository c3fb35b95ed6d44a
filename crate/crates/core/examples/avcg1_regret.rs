//! A-VCG1 with tuned exploration length: regret against the oracle VCG
//! revenue, next to its theoretical bound.

use truthful_cascade::harness::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
seed = 11
horizon = 4000
replications = 20

[instance]
ads = 6
slots = 3

[model]
preset = "paper-posdep"

[mechanism]
kind = "avcg1"
tune = "T1"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let outcomes = run_experiment(&cfg)?;
    let n = outcomes.len() as f64;
    let mean = |f: fn(&truthful_cascade::harness::ReplicationOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let first = &outcomes[0];
    println!("tau = {}  delta = {:.4}", first.params.tau, first.params.delta);
    println!("mean R_T     = {:.3}", mean(|o| o.revenue));
    println!("mean R_T^SW  = {:.3}", mean(|o| o.sw));
    println!("mean dev     = {:.3}", mean(|o| o.deviation));
    println!("mean bound   = {:.3}", mean(|o| o.bound));
    println!("R_T / bound  = {:.4}", mean(|o| o.revenue / o.bound));
    Ok(())
}
