//! Builds depth-k pools from a synthetic collection and projects the full
//! judgments onto them.

use poolsim::{build_pool, generate, project_judgments, Category, SynthConfig};

fn main() -> poolsim::Result<()> {
    let collection = generate(&SynthConfig {
        topics: 5,
        ..SynthConfig::default()
    })?;
    let qrels = &collection.qrels;

    for depth in [1, 5, 10, 20] {
        let pool = build_pool(&collection.runs, depth)?;
        let judged = project_judgments(qrels, &pool);
        println!(
            "depth {depth:>2}: {:>4} pooled docs, {:>3} relevant judged",
            pool.len(),
            judged.count_at_least(1)
        );
    }

    let neural = collection.runs.iter().filter(|r| r.category == Category::Neural);
    let pool = build_pool(neural, 10)?;
    let projected = project_judgments(qrels, &pool);
    println!(
        "neural-only pool at depth 10 keeps {} of {} judgments ({} topics retained)",
        projected.len(),
        qrels.len(),
        projected.num_topics()
    );
    Ok(())
}
