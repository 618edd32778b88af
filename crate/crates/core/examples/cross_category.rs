//! Pools every traditional run, scores the neural runs against it, and writes
//! a scatter CSV plus one SVG per metric to a temporary directory.

use std::fs;

use poolsim::reusability::{CrossConfig, CrossMode};
use poolsim::{generate, run_cross_category_experiment, Category, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let collection = generate(&SynthConfig {
        neural_exclusive_rate: 0.4,
        ..SynthConfig::default()
    })?;
    let config = CrossConfig {
        mode: CrossMode::Category {
            pool_category: Category::Traditional,
        },
        ..CrossConfig::default()
    };
    let report = run_cross_category_experiment(&collection.runs, &collection.qrels, &config)?;

    let out = std::env::temp_dir().join("poolsim-cross-example");
    fs::create_dir_all(&out)?;
    for d in &report.directions {
        println!("{}: {} pooled docs", d.label, d.pooled_documents);
        for (metric, taus) in &d.taus {
            let cells: Vec<String> = taus
                .iter()
                .map(|(group, tau)| format!("{group:?} {}", tau.map_or("undefined".into(), |t| format!("{t:.3}"))))
                .collect();
            println!("  {metric}: {}", cells.join(", "));
        }
        for metric in d.scatter.metrics() {
            let path = out.join(format!("{}.svg", metric.replace('@', "_at_")));
            fs::write(&path, d.scatter.to_svg(metric, &format!("{metric}, {}", d.label)))?;
            println!("  wrote {}", path.display());
        }
    }
    let mut csv = Vec::new();
    report.scatter().write_csv(&mut csv)?;
    fs::write(out.join("scatter.csv"), csv)?;
    Ok(())
}
