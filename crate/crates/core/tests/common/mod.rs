#![allow(dead_code)]

use cascade_lab::exprlang::{BinOp, Env, Expr, Func};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// `CASCADE_LAB_SEED` when set, otherwise [`DEFAULT_SEED`].
pub fn seed() -> u64 {
    std::env::var("CASCADE_LAB_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

/// A proptest runner whose random source is fixed by [`seed`].
pub fn runner(cases: u32) -> TestRunner {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed().to_le_bytes());
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes))
}

fn leaf(vars: &'static [&'static str]) -> BoxedStrategy<Expr> {
    prop_oneof![
        (1u32..=9).prop_map(|n| Expr::num(n as f64)),
        prop::sample::select(vec![0.5, 0.25, 1.5, 2.5, 0.1]).prop_map(Expr::num),
        prop::sample::select(vars.to_vec()).prop_map(Expr::var),
    ]
    .boxed()
}

/// Random expression trees over `vars` with non-negative literals, every
/// operator and every built-in function.
pub fn expr(vars: &'static [&'static str], depth: u32) -> BoxedStrategy<Expr> {
    leaf(vars)
        .prop_recursive(depth, 32, 2, |inner| {
            prop_oneof![
                3 => (
                    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
                1 => (inner.clone(), 1u32..=3).prop_map(|(b, n)| Expr::pow(b, Expr::num(n as f64))),
                1 => (inner.clone(), inner.clone()).prop_map(|(b, e)| Expr::pow(b, e)),
                1 => inner.clone().prop_map(Expr::neg),
                2 => (
                    prop::sample::select(vec![Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt]),
                    inner
                )
                    .prop_map(|(f, a)| Expr::call(f, a)),
            ]
        })
        .boxed()
}

/// Draws from `strategy` until `n` values pass `accept`.
pub fn sample<T: std::fmt::Debug>(
    strategy: &BoxedStrategy<T>,
    runner: &mut TestRunner,
    n: usize,
    accept: impl Fn(&T) -> bool,
) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..1_000_000 {
        if out.len() == n {
            break;
        }
        let v = strategy.new_tree(runner).expect("strategy never rejects").current();
        if accept(&v) {
            out.push(v);
        }
    }
    assert_eq!(out.len(), n, "too few acceptable samples");
    out
}

/// True when `e` evaluates to a value of magnitude at most `bound` at
/// every point, each point given as values for `vars`.
pub fn moderate(e: &Expr, vars: &[&str], points: &[Vec<f64>], bound: f64) -> bool {
    points.iter().all(|vals| {
        let mut env = Env::new();
        for (v, x) in vars.iter().zip(vals) {
            env.set(v, *x);
        }
        matches!(e.eval(&env), Ok(v) if v.is_finite() && v.abs() <= bound)
    })
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
