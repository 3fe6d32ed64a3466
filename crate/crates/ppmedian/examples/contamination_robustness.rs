//! Bias and mean-squared-error gain of the median estimator when the
//! observed pattern is contaminated: a clump of extra points dropped into
//! a small square (setting B) or four emptied corners (setting C).

use ppmedian::contamination::ContaminationConfig;
use ppmedian::estimators::{EstimatorId, JitterFunction};
use ppmedian::experiments::{run_experiment, ExperimentConfig};
use ppmedian::models::ModelConfig;

fn main() -> ppmedian::Result<()> {
    let config = ExperimentConfig {
        model: ModelConfig::Poisson { lambda: 100.0 },
        half_sides: vec![2.0],
        replications: 300,
        settings: vec![
            ContaminationConfig::Pure,
            ContaminationConfig::Add { rho: 0.1 },
            ContaminationConfig::Delete { rho: 0.1 },
        ],
        median_cells_per_side: vec![3, 5],
        median_rule_of_thumb: true,
        jitter: JitterFunction::Identity,
        voronoi: None,
        master_seed: 314,
        reference_intensity: None,
        calibration_replications: 1000,
    };
    let report = run_experiment(&config)?;

    println!("Poisson(100) on [-2, 2]^2, 300 replications, paired settings:");
    println!("  A = clean pattern");
    println!("  B = 10% extra points clumped in a square of 1/25 the window area");
    println!("  C = all points deleted from 4 corner squares totaling 10% of the area");
    println!();
    println!(
        "{:<8} {:>10} {:>6} {:>9} {:>9} {:>9} {:>9}",
        "setting", "estimator", "k_n", "mean", "bias", "mse", "gain%"
    );
    for row in &report.aggregates {
        println!(
            "{:<8} {:>10} {:>6} {:>9.2} {:>9.2} {:>9.2} {:>9.1}",
            row.setting,
            row.estimator.as_str(),
            row.param.to_string(),
            row.mean,
            row.bias,
            row.mse,
            row.gain_pct
        );
    }

    let gain_b = report
        .aggregates
        .iter()
        .find(|a| a.setting == "B" && a.estimator == EstimatorId::MedianJ)
        .map(|a| a.gain_pct)
        .unwrap_or(f64::NAN);
    println!();
    println!("Under B the clump lands in at most a few cells, so the median");
    println!("barely moves while the count estimator absorbs every extra");
    println!("point ({gain_b:.0}% MSE gain for the median at k_n = 9). Under C the");
    println!("corners empty at most 4 of the cells, and the median again");
    println!("tracks the majority of the window.");
    Ok(())
}
