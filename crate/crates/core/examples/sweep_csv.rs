//! Sweeps the horizon for A-VCG1, writes the summary CSV and reads it back.

use truthful_cascade::harness::{emit_csv, read_summary, run_sweep, ExperimentConfig, SweepAxis, SweepSpec};

const CONFIG: &str = r#"
seed = 1
horizon = 1000
replications = 8

[instance]
ads = 5
slots = 2

[mechanism]
kind = "avcg1"
tune = "T1"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ExperimentConfig::from_toml(CONFIG)?;
    let spec = SweepSpec::new(SweepAxis::T, vec![1000.0, 2000.0, 4000.0], base)?;
    let rows = run_sweep(&spec)?;
    let path = std::env::temp_dir().join("truthful_cascade_sweep.csv");
    emit_csv(&rows, &path)?;
    let back = read_summary(&path)?;
    println!("wrote {} rows to {}", back.len(), path.display());
    for value in &spec.points {
        let cell: Vec<_> = back.iter().filter(|r| r.value == *value).collect();
        let rt = cell.iter().map(|r| r.rt).sum::<f64>() / cell.len() as f64;
        println!("T = {value:>6}: mean R_T = {rt:8.3}  bound = {:8.3}  se = {:.3}", cell[0].bound, cell[0].stderr);
    }
    Ok(())
}
