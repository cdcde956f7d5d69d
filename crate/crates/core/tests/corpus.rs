use proptest::prelude::*;

use cotforge_core::corpus::{
    jaccard_estimate, lsh_dedup, parse_phrases, phrase_mine, DedupConfig, Document, MineConfig, MinHasher, ShingleSet, DEFAULT_PHRASES,
};
use cotforge_core::par::Executor;

fn words(range: std::ops::Range<usize>) -> String {
    range.map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
}

#[test]
fn estimator_concentrates_around_exact_jaccard() {
    let a = ShingleSet::from_text(&words(0..20), 1).unwrap();
    let b = ShingleSet::from_text(&words(10..30), 1).unwrap();
    assert!((a.jaccard(&b) - 1.0 / 3.0).abs() < 1e-15);
    let estimates: Vec<f64> = (0..200)
        .map(|seed| {
            let h = MinHasher::new(1, 512, seed).unwrap();
            jaccard_estimate(&h.signature_of_set(&a), &h.signature_of_set(&b)).unwrap()
        })
        .collect();
    let within = estimates.iter().filter(|e| (*e - 1.0 / 3.0).abs() <= 0.15).count();
    assert!(within >= 198, "{within} of 200 within 0.15");
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    assert!((mean - 1.0 / 3.0).abs() <= 0.05, "mean {mean}");
}

#[test]
fn lsh_links_ninety_percent_overlap() {
    let base = words(0..184);
    let extended = format!("{base} {}", words(1000..1020));
    let a = ShingleSet::from_text(&base, 5).unwrap();
    let b = ShingleSet::from_text(&extended, 5).unwrap();
    assert!((a.jaccard(&b) - 0.9).abs() < 1e-12);
    let docs = vec![Document::new("a", base), Document::new("b", extended)];
    let exec = Executor::sequential();
    let linked = (0..100)
        .filter(|&seed| {
            let cfg = DedupConfig { seed, ..DedupConfig::default() };
            lsh_dedup(&docs, &cfg, &exec).unwrap().clusters.len() == 1
        })
        .count();
    assert!(linked >= 99, "{linked} of 100 seeds");
}

#[test]
fn distinct_documents_stay_apart() {
    let docs: Vec<Document> = (0..20).map(|i| Document::new(format!("d{i:02}"), words(i * 100..i * 100 + 40))).collect();
    let res = lsh_dedup(&docs, &DedupConfig::default(), &Executor::sequential()).unwrap();
    assert_eq!(res.clusters.len(), 20);
    assert!(res.clusters.iter().all(|c| c.members.len() == 1));
}

#[test]
fn phrase_mining_examples() {
    let phrases = parse_phrases(DEFAULT_PHRASES);
    assert!(phrases.iter().any(|p| p == "Let's think step by step."));
    let docs = vec![
        Document::new("verbatim", "First, Let's think step by step. Then we add."),
        Document::new("paraphrase", "Lets think step by step"),
        Document::new("unrelated", "Quarterly revenue grew on strong demand"),
    ];
    let step = vec!["Let's think step by step.".to_string()];
    let cfg = MineConfig::default();
    let exec = Executor::sequential();
    let matches = phrase_mine(&docs, &step, &cfg, &exec).unwrap();
    let score = |id: &str| matches.iter().find(|m| m.id == id).map(|m| m.score);
    assert_eq!(score("verbatim"), Some(1.0));
    assert!(score("paraphrase").is_some_and(|s| s >= 0.5));
    assert_eq!(score("unrelated"), None);
}

fn corpus() -> impl Strategy<Value = Vec<Document>> {
    prop::collection::vec((0usize..6, 0usize..3), 1..14).prop_map(|specs| {
        specs
            .iter()
            .enumerate()
            .map(|(i, &(topic, tweak))| {
                let mut text = words(topic * 50..topic * 50 + 30);
                for t in 0..tweak {
                    text.push_str(&format!(" extra{i}x{t}"));
                }
                Document::new(format!("doc{i:02}"), text)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clustering_ignores_input_order(docs in corpus(), rotate in 0usize..14) {
        let cfg = DedupConfig::default();
        let exec = Executor::sequential();
        let forward = lsh_dedup(&docs, &cfg, &exec).unwrap();
        let mut shuffled = docs.clone();
        shuffled.reverse();
        let r = rotate % shuffled.len();
        shuffled.rotate_left(r);
        let again = lsh_dedup(&shuffled, &cfg, &Executor::new(3)).unwrap();
        prop_assert_eq!(&forward.clusters, &again.clusters);
        let total: usize = forward.clusters.iter().map(|c| c.members.len()).sum();
        prop_assert_eq!(total + forward.skipped.len(), docs.len());
    }

    #[test]
    fn signatures_are_deterministic(text in "[a-z ]{5,60}", seed: u64) {
        let h = MinHasher::new(2, 64, seed).unwrap();
        if let Ok(sig) = h.signature(&text) {
            prop_assert_eq!(&sig, &h.signature(&text).unwrap());
            prop_assert_eq!(jaccard_estimate(&sig, &sig).unwrap(), 1.0);
        }
    }
}
