//! Counts how many relevant documents each category's pool uncovers as the
//! pool depth grows, and prints the curves as CSV.

use poolsim::pooling::{curves_by_category, write_curves_csv};
use poolsim::{generate, SynthConfig};

fn main() -> poolsim::Result<()> {
    let collection = generate(&SynthConfig {
        neural_exclusive_rate: 0.5,
        ..SynthConfig::default()
    })?;
    let curves = curves_by_category(&collection.runs, &collection.qrels, 30, 1)?;
    for c in &curves {
        println!(
            "{:>12}: k=1 {:>4}  k=10 {:>4}  k=30 {:>4}",
            c.category_label,
            c.at(1),
            c.at(10),
            c.at(30)
        );
    }
    println!();
    write_curves_csv(&curves, std::io::stdout().lock())?;
    Ok(())
}
