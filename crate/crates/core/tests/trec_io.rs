use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use poolsim::trec_io::{parse_qrels, parse_run, write_qrels, write_run, GradeMode, RunManifest};
use poolsim::{Category, JudgmentSet, Run, RunParseOptions};
use proptest::prelude::*;

fn rankings_strategy() -> impl Strategy<Value = BTreeMap<String, Vec<String>>> {
    proptest::collection::btree_map(
        "[0-9]{1,4}",
        proptest::collection::btree_set("[A-Za-z0-9_.-]{1,12}", 1..20).prop_shuffle_set(),
        1..6,
    )
}

trait ShuffleSet {
    fn prop_shuffle_set(self) -> BoxedStrategy<Vec<String>>;
}

impl<S: Strategy<Value = BTreeSet<String>> + 'static> ShuffleSet for S {
    fn prop_shuffle_set(self) -> BoxedStrategy<Vec<String>> {
        self.prop_map(|s| s.into_iter().collect::<Vec<_>>())
            .prop_flat_map(|v| Just(v).prop_shuffle())
            .boxed()
    }
}

proptest! {
    #[test]
    fn run_round_trip(rankings in rankings_strategy()) {
        let run = Run::new("tag", "grp", Category::Neural, rankings).unwrap();
        let mut buf = Vec::new();
        write_run(&run, &mut buf).unwrap();
        let back = parse_run(buf.as_slice(), "tag", "grp", Category::Neural, &RunParseOptions::default()).unwrap();
        prop_assert_eq!(back, run);
    }

    #[test]
    fn parsed_lists_are_duplicate_free(rankings in rankings_strategy()) {
        let run = Run::new("t", "g", Category::Other, rankings).unwrap();
        let mut buf = Vec::new();
        write_run(&run, &mut buf).unwrap();
        let lines = buf.iter().filter(|b| **b == b'\n').count();
        let back = parse_run(buf.as_slice(), "t", "g", Category::Other, &RunParseOptions::default()).unwrap();
        let mut total = 0;
        for docs in back.rankings().values() {
            let set: BTreeSet<&String> = docs.iter().collect();
            prop_assert_eq!(set.len(), docs.len());
            total += docs.len();
        }
        prop_assert!(total <= lines);
    }

    #[test]
    fn qrels_round_trip_and_order_insensitive(
        entries in proptest::collection::btree_map(("[0-9]{1,3}", "[a-z0-9]{1,8}"), 0u8..=3, 0..40)
    ) {
        let mut lines: Vec<String> = entries
            .iter()
            .map(|((t, d), g)| format!("{t} 0 {d} {g}"))
            .collect();
        let forward = parse_qrels(lines.join("\n").as_bytes(), GradeMode::Strict).unwrap().0;
        lines.reverse();
        let backward = parse_qrels(lines.join("\n").as_bytes(), GradeMode::Strict).unwrap().0;
        prop_assert_eq!(&forward, &backward);
        let mut buf = Vec::new();
        write_qrels(&forward, &mut buf).unwrap();
        prop_assert_eq!(parse_qrels(buf.as_slice(), GradeMode::Strict).unwrap().0, forward);
    }
}

#[test]
fn score_ties_break_by_doc_id_descending() {
    let text = "1 Q0 a 1 0.5 x\n1 Q0 c 2 0.5 x\n1 Q0 b 3 0.9 x\n";
    let run = parse_run(text.as_bytes(), "x", "g", Category::Other, &RunParseOptions::default()).unwrap();
    assert_eq!(run.ranking("1"), ["b", "c", "a"]);
}

#[test]
fn out_of_range_grades() {
    let text = "1 0 d1 4\n1 0 d2 -1\n1 0 d3 2\n";
    assert!(parse_qrels(text.as_bytes(), GradeMode::Strict).is_err());
    let (q, warnings) = parse_qrels(text.as_bytes(), GradeMode::Lenient).unwrap();
    assert_eq!(q.grade("1", "d1"), Some(3));
    assert_eq!(q.grade("1", "d2"), Some(0));
    assert_eq!(warnings.len(), 2);
}

#[test]
fn manifest_round_trip() {
    let text = "path\trun_tag\tgroup\tcategory\nruns/a.txt\ta\tg1\ttraditional\nruns/b.txt\tb\tg1\tneural\n";
    let m = RunManifest::parse(text.as_bytes(), Path::new("/data")).unwrap();
    assert_eq!(m.entries.len(), 2);
    assert_eq!(m.entries[1].path, Path::new("/data/runs/b.txt"));
    let dup = "path\trun_tag\tgroup\tcategory\na.txt\ta\tg\tneural\nb.txt\ta\tg\tneural\n";
    assert!(RunManifest::parse(dup.as_bytes(), Path::new(".")).is_err());
}

#[test]
fn empty_judgment_set_has_no_topics() {
    let q = JudgmentSet::new();
    assert!(q.is_empty());
    assert_eq!(q.num_topics(), 0);
}
