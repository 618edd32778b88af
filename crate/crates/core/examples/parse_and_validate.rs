//! Parses a small run and qrels from memory and shows the canonical ordering
//! and the strict/lenient grade handling.

use poolsim::trec_io::{parse_qrels, parse_run, GradeMode, OrderingPolicy};
use poolsim::{Category, RunParseOptions};

const RUN: &str = "\
# topic iter doc rank score tag
1 Q0 D7 1 12.5 bm25
1 Q0 D3 2 12.5 bm25
1 Q0 D9 3 14.0 bm25
2 Q0 D1 1 3.0 bm25
";

const QRELS: &str = "\
1 0 D9 3
1 0 D7 1
1 0 D3 5
2 0 D1 0
";

fn main() -> poolsim::Result<()> {
    let run = parse_run(
        RUN.as_bytes(),
        "bm25",
        "org-a",
        Category::Traditional,
        &RunParseOptions::default(),
    )?;
    // Score descending, ties by doc id descending: D9, D7, D3.
    println!("topic 1 by score: {:?}", run.ranking("1"));

    let trusted = RunParseOptions {
        ordering: OrderingPolicy::TrustRank,
        ..RunParseOptions::default()
    };
    match parse_run(RUN.as_bytes(), "bm25", "org-a", Category::Traditional, &trusted) {
        Ok(r) => println!("topic 1 by rank column: {:?}", r.ranking("1")),
        Err(e) => println!("rank column rejected: {e}"),
    }

    if let Err(e) = parse_qrels(QRELS.as_bytes(), GradeMode::Strict) {
        println!("strict qrels: {e}");
    }
    let (qrels, warnings) = parse_qrels(QRELS.as_bytes(), GradeMode::Lenient)?;
    for w in &warnings {
        println!("warning: {w}");
    }
    println!(
        "{} topics, {} judgments, {} relevant",
        qrels.num_topics(),
        qrels.len(),
        qrels.count_at_least(1)
    );
    Ok(())
}
