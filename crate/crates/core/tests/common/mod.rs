//! Independent reference implementations shared by the integration tests
//! and the acceptance suite. They favour obviousness over speed.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cotforge_core::reward::CorrectnessLabel;

/// Closed-form length-shaped reward, written directly from the cosine schedule.
#[allow(clippy::too_many_arguments)]
pub fn cosine_oracle(correct: bool, len: u64, r0c: f64, rlc: f64, r0w: f64, rlw: f64, re: f64, lmax: u64) -> f64 {
    if len >= lmax {
        return re;
    }
    let (r0, rl) = if correct { (r0c, rlc) } else { (r0w, rlw) };
    let x = std::f64::consts::PI * len as f64 / lmax as f64;
    rl + (r0 - rl) * (1.0 + x.cos()) / 2.0
}

/// Quadratic repetition penalty: every window is compared against every
/// earlier window element by element.
pub fn repetition_oracle(tokens: &[u32], active: usize, out_len: usize, n: usize, p: f64) -> Vec<f64> {
    let mut r = vec![0.0; out_len];
    if n > active {
        return r;
    }
    for j in 0..=(active - n) {
        let repeated = (0..j).any(|i| (0..n).all(|k| tokens[i + k] == tokens[j + k]));
        if repeated {
            for slot in &mut r[j..j + n] {
                *slot = p;
            }
        }
    }
    r
}

/// `A_t = sum_m sum_{k >= t} gamma_m^(k - t) r_{m,k} - V_t`, as a double loop.
pub fn advantage_oracle(rewards: &[Vec<f64>], gammas: &[f64], values: &[f64]) -> Vec<f64> {
    let t_len = values.len();
    (0..t_len)
        .map(|t| {
            let mut total = 0.0;
            for (channel, &gamma) in rewards.iter().zip(gammas) {
                for (k, &r) in channel.iter().enumerate().skip(t) {
                    total += gamma.powi((k - t) as i32) * r;
                }
            }
            total - values[t]
        })
        .collect()
}

pub fn random_tokens(rng: &mut ChaCha8Rng, alphabet: u32, len: usize) -> Vec<u32> {
    (0..len).map(|_| rng.gen_range(0..alphabet)).collect()
}

/// Rewards that are mostly zero with occasional spikes, like terminal and
/// penalty channels.
pub fn random_channel(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| if rng.gen_bool(0.3) { rng.gen_range(-10.0..10.0) } else { 0.0 })
        .collect()
}

/// Central finite-difference gradient of `f` at `x`.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

use CorrectnessLabel::{Correct, NoAnswer, Wrong};

/// Hand-labelled `(response, gold, label)` triples for the rule-based grader.
pub const GRADER_TABLE: &[(&str, &str, CorrectnessLabel)] = &[
    // Fractions
    ("so \\boxed{3/4}", "3/4", Correct),
    ("so \\boxed{6/8}", "3/4", Correct),
    ("so \\boxed{\\frac{3}{4}}", "3/4", Correct),
    ("so \\boxed{\\dfrac{3}{4}}", "0.75", Correct),
    ("so \\boxed{\\tfrac{6}{8}}", "3/4", Correct),
    ("so \\boxed{\\frac34}", "3/4", Correct),
    ("so \\boxed{-\\frac{1}{2}}", "-1/2", Correct),
    ("so \\boxed{\\frac{-1}{2}}", "-0.5", Correct),
    ("so \\boxed{1/-2}", "-1/2", Correct),
    ("so \\boxed{4/3}", "3/4", Wrong),
    ("so \\boxed{2/4}", "1/3", Wrong),
    ("so \\boxed{10/5}", "2", Correct),
    ("so \\boxed{1/0}", "1/0", Correct),
    ("so \\boxed{1/0}", "0", Wrong),
    // Decimals and integers
    ("so \\boxed{0.5}", "1/2", Correct),
    ("so \\boxed{.5}", "0.5", Correct),
    ("so \\boxed{5.}", "5", Correct),
    ("so \\boxed{5.000}", "5", Correct),
    ("so \\boxed{-0.25}", "-1/4", Correct),
    ("so \\boxed{+7}", "7", Correct),
    ("so \\boxed{0.333}", "1/3", Wrong),
    ("so \\boxed{0.3333333333333333}", "1/3", Wrong),
    ("so \\boxed{1,000}", "1000", Correct),
    ("so \\boxed{12,345,678}", "12345678", Correct),
    ("so \\boxed{1,00}", "100", Wrong),
    ("so \\boxed{007}", "7", Correct),
    ("so \\boxed{-0}", "0", Correct),
    ("so \\boxed{100000000000000000000001}", "100000000000000000000000", Wrong),
    ("so \\boxed{123456789012345678901234567890}", "123456789012345678901234567890", Correct),
    ("so \\boxed{3.14}", "3.14159", Wrong),
    ("so \\boxed{42}", "41", Wrong),
    // Delimiters and spacing
    ("so \\boxed{$\\frac{1}{2}$}", "1/2", Correct),
    ("so \\boxed{\\left( 5 \\right)}", "(5)", Correct),
    ("so \\boxed{ 1 / 2 }", "0.5", Correct),
    ("so \\boxed{\\text{12}}", "12", Correct),
    ("so \\boxed{\\,3\\,}", "3", Correct),
    ("so \\boxed{\\(7\\)}", "7", Correct),
    ("so \\boxed{\\displaystyle\\frac{2}{3}}", "2/3", Correct),
    // Booleans
    ("so \\boxed{True}", "True", Correct),
    ("so \\boxed{true}", "True", Correct),
    ("so \\boxed{TRUE}", "true", Correct),
    ("so \\boxed{False}", "false", Correct),
    ("so \\boxed{\\text{False}}", "False", Correct),
    ("so \\boxed{False}", "True", Wrong),
    ("so \\boxed{yes}", "True", Wrong),
    // Text answers
    ("so \\boxed{Paris}", "paris", Correct),
    ("so \\boxed{x = 3}", "x=3", Correct),
    ("so \\boxed{(1, 2)}", "(1,2)", Correct),
    ("so \\boxed{[0, 1)}", "[0,1)", Correct),
    ("so \\boxed{\\sqrt{2}}", "\\sqrt{2}", Correct),
    ("so \\boxed{\\sqrt{2}}", "\\sqrt{3}", Wrong),
    ("so \\boxed{\\pi}", "3.14159", Wrong),
    ("so \\boxed{2\\sqrt{2}}", "\\sqrt{8}", Wrong),
    // Extraction: last box wins, nesting, fallbacks
    ("first \\boxed{1} then \\boxed{2}", "2", Correct),
    ("first \\boxed{2} then \\boxed{1}", "2", Wrong),
    ("nested \\boxed{\\frac{1}{\\sqrt{4}}}", "\\frac{1}{\\sqrt{4}}", Correct),
    ("braces \\boxed{\\{1, 2\\}}", "\\{1,2\\}", Correct),
    ("The final answer is 12.", "12", Correct),
    ("The final answer is: $\\frac{1}{3}$", "1/3", Correct),
    ("the FINAL ANSWER IS 5\nmore words", "5", Correct),
    ("The final answer is 4 but \\boxed{5}", "5", Correct),
    // No answer
    ("I could not solve it.", "3", NoAnswer),
    ("", "3", NoAnswer),
    ("unbalanced \\boxed{3", "3", NoAnswer),
    ("\\boxed{2} and then \\boxed{3", "3", NoAnswer),
    ("The answer might be 3", "3", NoAnswer),
    ("The final answer is", "3", NoAnswer),
    ("boxed{3} without backslash", "3", NoAnswer),
];
