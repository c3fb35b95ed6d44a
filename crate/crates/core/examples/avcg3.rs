//! A-VCG3 learns qualities from the top slot only and then charges
//! weighted-VCG prices; its regret bound depends on 1/q_min.

use truthful_cascade::harness::{run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for q_min in [0.2, 0.4] {
        let text = format!(
            r#"
seed = 21
horizon = 6000
replications = 10

[instance]
ads = 4
slots = 2
q_min = {q_min}
q_max = 0.9

[model]
preset = "uniform-lambda"
low = 0.5

[mechanism]
kind = "avcg3"
tune = "T11"
"#
        );
        let cfg = ExperimentConfig::from_toml(&text)?;
        let outcomes = run_experiment(&cfg)?;
        let n = outcomes.len() as f64;
        let rt = outcomes.iter().map(|o| o.revenue).sum::<f64>() / n;
        let b = outcomes.iter().map(|o| o.bound).sum::<f64>() / n;
        println!("q_min = {q_min}: tau = {}  R_T = {rt:.2}  bound = {b:.2}", outcomes[0].params.tau);
    }
    Ok(())
}
