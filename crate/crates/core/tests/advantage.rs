mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{advantage_oracle, random_channel};
use cotforge_core::{gae_single, multi_channel_advantage, ChannelTrace, ValueTrace};

const GAMMAS: [f64; 4] = [0.0, 0.99, 0.999, 1.0];

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn matches_double_sum_oracle_on_random_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let t = rng.gen_range(1..=64);
        let m = rng.gen_range(1..=3);
        let rewards: Vec<Vec<f64>> = (0..m).map(|_| random_channel(&mut rng, t)).collect();
        let gammas: Vec<f64> = (0..m).map(|_| GAMMAS[rng.gen_range(0..GAMMAS.len())]).collect();
        let values: Vec<f64> = (0..t).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let channels: Vec<ChannelTrace> = rewards
            .iter()
            .zip(&gammas)
            .map(|(r, &g)| ChannelTrace::new(r.clone(), g).unwrap())
            .collect();
        let got = multi_channel_advantage(&channels, &ValueTrace(values.clone())).unwrap();
        worst = worst.max(max_abs_diff(&got.0, &advantage_oracle(&rewards, &gammas, &values)));
    }
    assert!(worst < 1e-9, "max abs diff {worst}");
}

#[test]
fn gae_with_unit_lambda_is_the_single_channel_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..500 {
        let t = rng.gen_range(1..=64);
        let gamma = GAMMAS[rng.gen_range(0..GAMMAS.len())];
        let rewards = random_channel(&mut rng, t);
        let values = ValueTrace((0..t).map(|_| rng.gen_range(-5.0..5.0)).collect());
        let gae = gae_single(&rewards, &values, gamma, 1.0).unwrap();
        let multi = multi_channel_advantage(&[ChannelTrace::new(rewards, gamma).unwrap()], &values).unwrap();
        assert_eq!(gae.0, multi.0);
    }
}

#[test]
fn errors() {
    let v = ValueTrace::zeros(2);
    assert!(multi_channel_advantage(&[], &v).is_err());
    assert!(ChannelTrace::new(vec![0.0], 1.5).is_err());
    assert!(multi_channel_advantage(&[ChannelTrace::new(vec![0.0], 1.0).unwrap()], &v).is_err());
    assert!(gae_single(&[0.0, 0.0], &v, 0.9, 0.0).is_err());
}

fn trace(max_channels: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (1usize..32, 1..=max_channels).prop_flat_map(|(t, m)| {
        (
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, t), m),
            prop::collection::vec(0.0f64..=1.0, m),
            prop::collection::vec(-5.0f64..5.0, t),
        )
    })
}

fn channels(rewards: &[Vec<f64>], gammas: &[f64]) -> Vec<ChannelTrace> {
    rewards
        .iter()
        .zip(gammas)
        .map(|(r, &g)| ChannelTrace::new(r.clone(), g).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn terminal_step_is_reward_sum_minus_value((rewards, gammas, values) in trace(3)) {
        let a = multi_channel_advantage(&channels(&rewards, &gammas), &ValueTrace(values.clone())).unwrap();
        let last = values.len() - 1;
        let expected: f64 = rewards.iter().map(|r| r[last]).sum::<f64>() - values[last];
        prop_assert!((a.0[last] - expected).abs() < 1e-9);
    }

    #[test]
    fn channel_additivity((rewards, gammas, values) in trace(4)) {
        prop_assume!(rewards.len() >= 2);
        let split = rewards.len() / 2;
        let v = ValueTrace(values.clone());
        let all = multi_channel_advantage(&channels(&rewards, &gammas), &v).unwrap();
        let a = multi_channel_advantage(&channels(&rewards[..split], &gammas[..split]), &v).unwrap();
        let b = multi_channel_advantage(&channels(&rewards[split..], &gammas[split..]), &ValueTrace::zeros(values.len())).unwrap();
        for t in 0..values.len() {
            prop_assert!((all.0[t] - (a.0[t] + b.0[t])).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_a_channel_scales_its_contribution((rewards, gammas, values) in trace(3), alpha in -3.0f64..3.0) {
        let zeros = ValueTrace::zeros(values.len());
        let base = multi_channel_advantage(&channels(&rewards, &gammas), &zeros).unwrap();
        let mut scaled = rewards.clone();
        for r in &mut scaled[0] {
            *r *= alpha;
        }
        let after = multi_channel_advantage(&channels(&scaled, &gammas), &zeros).unwrap();
        let only = multi_channel_advantage(&channels(&rewards[..1], &gammas[..1]), &zeros).unwrap();
        for t in 0..values.len() {
            let expected = base.0[t] + (alpha - 1.0) * only.0[t];
            prop_assert!((after.0[t] - expected).abs() < 1e-8);
        }
    }
}
