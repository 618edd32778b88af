use poolsim::{kendall_tau, PairedScores, TauOptions, TauVariant};

fn main() -> poolsim::Result<()> {
    let labels = ["bm25", "rm3", "bert", "t5", "colbert"].map(String::from).to_vec();
    let actual = vec![0.48, 0.51, 0.70, 0.72, 0.69];
    let estimated = vec![0.45, 0.47, 0.55, 0.55, 0.61];
    let paired = PairedScores::new(labels, actual, estimated)?;

    let a = TauOptions {
        variant: TauVariant::TauA,
        round_decimals: None,
    };
    println!("tau-a: {:.4}", kendall_tau(&paired, a)?);
    println!("tau-b: {:.4}", kendall_tau(&paired, TauOptions::default())?);

    let rounded = TauOptions {
        round_decimals: Some(1),
        ..TauOptions::default()
    };
    println!(
        "tau-b on values rounded to 1 decimal: {:.4}",
        kendall_tau(&paired, rounded)?
    );

    let flat = PairedScores::new(vec!["x".into(), "y".into()], vec![0.5, 0.5], vec![0.1, 0.9])?;
    match kendall_tau(&flat, TauOptions::default()) {
        Ok(t) => println!("constant vector: {t}"),
        Err(e) => println!("constant vector: {e}"),
    }
    Ok(())
}
