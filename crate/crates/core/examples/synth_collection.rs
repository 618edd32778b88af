//! Generates a synthetic collection, writes it to disk in the standard
//! formats, and loads it back through the manifest.

use poolsim::{generate, load_manifest, RunParseOptions, SynthConfig};

fn main() -> poolsim::Result<()> {
    let config = SynthConfig {
        topics: 8,
        groups_per_category: 3,
        neural_exclusive_rate: 0.3,
        seed: 2024,
        ..SynthConfig::default()
    };
    let (trad_only, neural_only) = config.exclusive_counts();
    println!("per topic: {trad_only} relevant docs only traditional runs see, {neural_only} only neural runs see");

    let collection = generate(&config)?;
    let dir = std::env::temp_dir().join("poolsim-synth-example");
    let manifest = collection.write_to_dir(&dir)?;
    println!("wrote {}", manifest.display());

    let loaded = load_manifest(&manifest, &RunParseOptions::default())?;
    assert_eq!(loaded.runs, collection.runs);
    for (category, n) in loaded.counts_by_category() {
        println!("{n} {category} runs");
    }
    Ok(())
}
