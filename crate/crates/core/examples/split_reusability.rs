//! Repeated group-aware split experiment: pool half of one category's groups,
//! evaluate everyone else, and average Kendall's tau per test group.
//!
//! Run with `cargo run --release --example split_reusability`.

use poolsim::reusability::TestGroup;
use poolsim::{generate, run_split_experiment, Category, ExperimentConfig, SynthConfig};

fn main() -> poolsim::Result<()> {
    let collection = generate(&SynthConfig {
        neural_exclusive_rate: 0.5,
        seed: 7,
        ..SynthConfig::default()
    })?;

    for pool_category in [Category::Traditional, Category::Neural] {
        let config = ExperimentConfig {
            pool_category,
            rng_seed: 7,
            ..ExperimentConfig::default()
        };
        let exp = run_split_experiment(&collection.runs, &collection.qrels, &config)?;
        println!("{pool_category} pools, {} repeats", exp.report.per_repeat.len());
        for (metric, groups) in &exp.report.averages {
            let cell = |g: TestGroup| groups[&g].mean.map_or("undefined".into(), |v| format!("{v:.3}"));
            println!(
                "  {metric:<8} traditional {}  neural {}  all {}",
                cell(TestGroup::Traditional),
                cell(TestGroup::Neural),
                cell(TestGroup::All)
            );
        }
    }
    Ok(())
}
