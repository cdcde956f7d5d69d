mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_tokens, repetition_oracle};
use cotforge_core::repetition::{ngram_repetition_penalty, repetition_stats, TokenSequence, DEFAULT_NGRAM, DEFAULT_PENALTY};

#[test]
fn matches_quadratic_oracle_on_random_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..1000 {
        let alphabet = [2, 16, 1024][case % 3];
        let len = rng.gen_range(1..=256);
        let tokens = random_tokens(&mut rng, alphabet, len);
        let active = if rng.gen_bool(0.5) { len } else { rng.gen_range(1..=len) };
        let out_len = active + if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..32) };
        let n = rng.gen_range(1..=8);
        let seq = TokenSequence::new(tokens.clone(), active, out_len).unwrap();
        let got = ngram_repetition_penalty(&seq, n, -0.05).unwrap();
        assert_eq!(got.values, repetition_oracle(&tokens, active, out_len, n, -0.05), "case {case}");
    }
}

#[test]
fn hand_trace() {
    let seq = TokenSequence::full(vec![7, 8, 7, 8, 7, 8]).unwrap();
    assert_eq!(
        ngram_repetition_penalty(&seq, 2, -0.05).unwrap().values,
        vec![0.0, 0.0, -0.05, -0.05, -0.05, -0.05]
    );
}

#[test]
fn defaults() {
    assert_eq!(DEFAULT_NGRAM, 40);
    assert_eq!(DEFAULT_PENALTY, -0.05);
}

#[test]
fn active_longer_than_output_is_rejected() {
    assert!(TokenSequence::new(vec![1, 2, 3], 3, 2).is_err());
    assert!(TokenSequence::new(vec![1, 2], 3, 4).is_err());
    assert!(TokenSequence::new(vec![1, 2], 0, 4).is_err());
    let seq = TokenSequence::full(vec![1, 1]).unwrap();
    assert!(ngram_repetition_penalty(&seq, 0, -0.05).is_err());
}

fn sequence() -> impl Strategy<Value = (Vec<u32>, usize, usize, usize)> {
    (prop::collection::vec(0u32..6, 1..120), 1usize..6, 0usize..16).prop_flat_map(|(tokens, n, pad)| {
        let len = tokens.len();
        (Just(tokens), 1..=len, Just(n), Just(pad))
    })
    .prop_map(|(tokens, active, n, pad)| (tokens, active, active + pad, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn values_are_zero_or_penalty_and_padding_is_zero((tokens, active, out_len, n) in sequence(), p in -1.0f64..0.0) {
        let seq = TokenSequence::new(tokens, active, out_len).unwrap();
        let r = ngram_repetition_penalty(&seq, n, p).unwrap();
        prop_assert_eq!(r.len(), out_len);
        prop_assert!(r.values.iter().all(|&v| v == 0.0 || v == p));
        prop_assert!(r.values[active..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_vector_iff_no_window_repeats((tokens, active, out_len, n) in sequence()) {
        let seq = TokenSequence::new(tokens.clone(), active, out_len).unwrap();
        let r = ngram_repetition_penalty(&seq, n, -0.05).unwrap();
        let windows: Vec<&[u32]> = if n <= active { tokens[..active].windows(n).collect() } else { Vec::new() };
        let distinct: std::collections::HashSet<&[u32]> = windows.iter().copied().collect();
        prop_assert_eq!(r.values.iter().all(|&v| v == 0.0), distinct.len() == windows.len());
    }

    #[test]
    fn second_copy_of_doubled_sequence_is_fully_penalised(s in prop::collection::vec(0u32..50, 1..80), n in 1usize..6) {
        prop_assume!(s.len() >= n);
        let doubled: Vec<u32> = s.iter().chain(&s).copied().collect();
        let seq = TokenSequence::full(doubled).unwrap();
        let r = ngram_repetition_penalty(&seq, n, -0.05).unwrap();
        prop_assert!(r.values[s.len()..].iter().all(|&v| v == -0.05));
        let stats = repetition_stats(&seq, n).unwrap();
        prop_assert!(stats.penalized_fraction >= 0.5);
    }
}
