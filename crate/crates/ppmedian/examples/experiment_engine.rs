//! The replication engine end to end: parse a TOML experiment config, run
//! the paired contamination grid, and emit the three report artifacts
//! (records CSV, aggregates CSV, run manifest).

use ppmedian::experiments::{run_experiment, ExperimentConfig, TimingColumn};

const CONFIG: &str = r#"
half_sides = [1.0]
replications = 100
median_cells_per_side = [3, 5]
jitter = "identity"
master_seed = 20260819

[model]
kind = "poisson"
lambda = 100.0

[[settings]]
kind = "pure"

[[settings]]
kind = "add"
rho = 0.1

[voronoi]
grid_per_side = 100
trim_fractions = [0.05]
"#;

fn main() -> ppmedian::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let report = run_experiment(&config)?;

    println!("config: Poisson(100) on [-1, 1]^2, 100 paired replications\n");

    let records = report.records_csv(TimingColumn::Zeroed);
    println!("records.csv ({} rows), first five:", report.records.len());
    for line in records.lines().take(6) {
        println!("  {line}");
    }

    println!("\naggregates.csv:");
    for line in report.aggregates_csv().lines() {
        println!("  {line}");
    }

    println!("\nmanifest.json (truncated):");
    let manifest = report.manifest_json(TimingColumn::Zeroed, "records.csv", "aggregates.csv")?;
    for line in manifest.lines().take(12) {
        println!("  {line}");
    }
    println!("  ...");

    println!();
    println!("Every random draw comes from a substream indexed by (window,");
    println!("replication, purpose), so the records are byte-identical at any");
    println!("worker count, and any single replication can be replayed in");
    println!("isolation. The base pattern of a replication is shared across");
    println!("settings (its hash is the last records column), which makes the");
    println!("contamination columns directly comparable.");
    Ok(())
}
