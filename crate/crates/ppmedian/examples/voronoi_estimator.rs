//! The Voronoi competitor: build the tessellation of the observed points,
//! clip every cell to the window, drop cells touching the boundary, and
//! average inverse cell areas over a dummy grid with a symmetric trim.

use ppmedian::estimators::{estimate_std, estimate_voronoi, voronoi_cell_areas};
use ppmedian::geometry::Window;
use ppmedian::models::ModelConfig;
use ppmedian::rng::RandomStream;

fn main() -> ppmedian::Result<()> {
    let window = Window::new(1.0)?;
    let model = ModelConfig::Poisson { lambda: 100.0 };
    let pattern = model.simulate(window, RandomStream::new(27))?;

    let cells = voronoi_cell_areas(&pattern)?;
    let total: f64 = cells.areas.iter().sum();
    println!("{} sites on [-1, 1]^2", pattern.len());
    println!(
        "{} interior cells, {} border cells; areas sum to {:.9} (window volume {})",
        cells.interior_count(),
        cells.border_count(),
        total,
        window.volume()
    );

    println!("\ntrim fraction vs estimate (true intensity 100):");
    for f in [0.0, 0.025, 0.05, 0.1] {
        let est = estimate_voronoi(&pattern, 200, f)?;
        println!("  f = {f:<5} -> {:.2}", est.value);
    }
    println!("  standard     -> {:.2}", estimate_std(&pattern).value);

    println!();
    println!("The untrimmed dummy average telescopes to (interior cells) /");
    println!("(interior area) and is nearly unbiased. Inverse areas are");
    println!("right-skewed, so symmetric trimming pulls the estimate down a");
    println!("few percent on clean data; the payoff is resistance against");
    println!("clumps of extra points, which create tiny cells whose huge");
    println!("inverse areas land in the trimmed tail.");
    Ok(())
}
