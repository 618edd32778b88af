//! NDCG@k and MRR on a single hand-made topic, then per-run means over a
//! synthetic collection.

use std::collections::BTreeMap;

use poolsim::{evaluate_run, generate, mrr, ndcg_at_k, Gain, MetricConfig, SynthConfig};

fn main() -> poolsim::Result<()> {
    let ranking = ["a", "b", "c", "d"];
    let judged: BTreeMap<String, u8> = [("a", 0), ("b", 2), ("d", 3), ("e", 1)]
        .into_iter()
        .map(|(d, g)| (d.to_string(), g))
        .collect();

    let exp = MetricConfig::ndcg(3);
    let lin = MetricConfig::ndcg(3).with_gain(Gain::Linear);
    println!("ndcg@3 exponential gain: {:.4}", ndcg_at_k(&ranking, &judged, &exp));
    println!("ndcg@3 linear gain:      {:.4}", ndcg_at_k(&ranking, &judged, &lin));
    println!(
        "reciprocal rank:         {:.4}",
        mrr(&ranking, &judged, &MetricConfig::mrr())
    );
    println!(
        "reciprocal rank, grade >= 3: {:.4}",
        mrr(&ranking, &judged, &MetricConfig::mrr().with_mrr_threshold(3))
    );

    let collection = generate(&SynthConfig {
        topics: 10,
        ..SynthConfig::default()
    })?;
    println!();
    for run in collection.runs.iter().take(4) {
        let n = evaluate_run(run, &collection.qrels, &MetricConfig::ndcg(10));
        let m = evaluate_run(run, &collection.qrels, &MetricConfig::mrr());
        println!("{:<14} ndcg@10 {:.3}  mrr {:.3}", run.run_tag, n.mean, m.mean);
    }
    Ok(())
}
