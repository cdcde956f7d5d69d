use std::io::Cursor;

use proptest::prelude::*;

use cotforge_core::pipeline::{build_rl_promptset, read_jsonl, write_jsonl, DatasetRecord, GlobalConfig, PromptsetMode};
use cotforge_core::reward::CorrectnessLabel;
use cotforge_core::verifier::short_form_filterable;

fn record() -> impl Strategy<Value = DatasetRecord> {
    let label = prop_oneof![Just(CorrectnessLabel::Correct), Just(CorrectnessLabel::Wrong), Just(CorrectnessLabel::NoAnswer)];
    (
        "[a-z0-9]{1,6}",
        any::<String>(),
        prop::option::of(prop_oneof!["-?[0-9]{1,4}", "[0-9]/[1-9]", "\\\\sqrt\\{[0-9]\\}", any::<String>()]),
        prop::option::of(any::<String>()),
        prop::option::of(label),
    )
        .prop_map(|(problem_id, prompt, gold, response, label)| DatasetRecord {
            problem_id,
            prompt,
            gold,
            response,
            label,
        })
}

fn roundtrip(records: &[DatasetRecord]) -> Vec<DatasetRecord> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records).unwrap();
    let read = read_jsonl::<_, DatasetRecord>(Cursor::new(buf)).unwrap();
    assert!(read.malformed.is_empty());
    read.records
}

proptest! {
    #[test]
    fn jsonl_roundtrip_is_identity(records in prop::collection::vec(record(), 0..20)) {
        prop_assert_eq!(roundtrip(&records), records);
    }

    #[test]
    fn filtered_promptset_is_a_subset_of_unfiltered(records in prop::collection::vec(record(), 0..40)) {
        let (all, all_summary) = build_rl_promptset(records.clone(), PromptsetMode::Unfiltered);
        let (filtered, summary) = build_rl_promptset(records.clone(), PromptsetMode::Filtered);
        prop_assert!(filtered.len() <= all.len());
        for r in &filtered {
            prop_assert!(all.contains(r));
            prop_assert!(short_form_filterable(r.gold.as_deref().unwrap()));
        }
        prop_assert_eq!(summary.seen, records.len());
        prop_assert_eq!(all_summary.kept, all.len());
        let mut ids: Vec<&str> = all.iter().map(|r| r.problem_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), all.len());
    }
}

#[test]
fn malformed_lines_are_skipped() {
    let text = "{\"problem_id\":\"a\",\"prompt\":\"p\"}\nnot json\n\n{\"problem_id\":\"b\",\"prompt\":\"q\"}\n";
    let read = read_jsonl::<_, DatasetRecord>(Cursor::new(text)).unwrap();
    assert_eq!(read.records.len(), 2);
    assert_eq!(read.malformed.len(), 1);
    assert_eq!(read.malformed[0].line, 2);
}

#[test]
fn empty_input_yields_nothing() {
    let read = read_jsonl::<_, DatasetRecord>(Cursor::new("")).unwrap();
    assert!(read.records.is_empty() && read.malformed.is_empty());
    let (kept, summary) = build_rl_promptset(Vec::new(), PromptsetMode::Filtered);
    assert!(kept.is_empty());
    assert_eq!(summary.ratio(), 0.0);
}

#[test]
fn promptset_counts_skips() {
    let rec = |id: &str, gold: Option<&str>| DatasetRecord {
        problem_id: id.into(),
        prompt: "p".into(),
        gold: gold.map(Into::into),
        response: None,
        label: None,
    };
    let input = vec![rec("1", Some("3/4")), rec("2", None), rec("1", Some("5")), rec("3", Some("a proof that the sequence converges for every starting value")), rec("4", Some("12"))];
    let (kept, summary) = build_rl_promptset(input.clone(), PromptsetMode::Filtered);
    let ids: Vec<&str> = kept.iter().map(|r| r.problem_id.as_str()).collect();
    assert_eq!(ids, ["1", "4"]);
    let (shadowed, _) = build_rl_promptset(vec![rec("5", Some("a proof that the sequence converges for every starting value")), rec("5", Some("7"))], PromptsetMode::Filtered);
    assert!(shadowed.is_empty());
    assert_eq!(summary.missing_gold, 1);
    assert_eq!(summary.duplicate_ids, 1);
    let (all, _) = build_rl_promptset(input, PromptsetMode::Unfiltered);
    assert_eq!(all.len(), 3);
}

#[test]
fn global_config_defaults_and_rejections() {
    assert_eq!(GlobalConfig::from_json("{}", "inline").unwrap(), GlobalConfig::default());
    assert!(GlobalConfig::from_json("{\"rewrad\": {}}", "inline").is_err());
    assert!(GlobalConfig::from_json("{\"repetition\": {\"ngram\": 0}}", "inline").is_err());
    assert!(GlobalConfig::from_json("{\"advantage\": {\"gamma_correct\": 1.5}}", "inline").is_err());
    assert!(GlobalConfig::from_json("{\"reward\": {\"preset\": \"nope\"}}", "inline").is_err());
    let seeded = GlobalConfig::from_json("{\"seed\": 9, \"corpus\": {\"dedup\": {\"seed\": 1}}}", "inline").unwrap();
    assert_eq!((seeded.corpus.dedup.seed, seeded.corpus.mine.seed, seeded.simulator.seed), (9, 9, 9));
    let text = serde_json::to_string(&GlobalConfig::default()).unwrap();
    assert_eq!(GlobalConfig::from_json(&text, "inline").unwrap(), GlobalConfig::default());
}
