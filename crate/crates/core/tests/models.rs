mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::{hand_dataset, sigmoid, small};
use zilm::domain::{Split, SplitSelector};
use zilm::models::{
    irt_prob, ktm1_grad, ktm1_nll, ktm1_prob, zilm_failure_prob, zilm_grad, zilm_nll, zilm_success_prob, Ktm1Params,
    Penalty, ZilmParams,
};

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn random_zilm(seed: u64, n_s: usize, n_i: usize) -> ZilmParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ZilmParams::zeros(n_s, n_i);
    p.theta = random_vec(&mut rng, n_s, 1.0);
    p.b = random_vec(&mut rng, n_i, 1.0);
    p.a_raw = random_vec(&mut rng, n_i, 0.5);
    p.g_raw = random_vec(&mut rng, n_i, 0.5);
    p.w_pi = random_vec(&mut rng, p.w_pi.len(), 0.5);
    p.w_pi[0] = -2.0;
    p
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

/// Central differences of `f` at `x` over every coordinate.
fn numeric_grad(x: &[f64], eps: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = x[k];
            x[k] = orig + eps;
            let up = f(&x);
            x[k] = orig - eps;
            let down = f(&x);
            x[k] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

fn penalty() -> Penalty {
    Penalty { l2_theta: 0.01, l2_item: 0.001, l2_weights: 0.001 }
}

#[test]
fn zilm_gradient_matches_central_differences() {
    let d = small(0, 10, 5, 5);
    for seed in 0..3 {
        let p = random_zilm(seed, 10, 5);
        let analytic = zilm_grad(&p, &d, SplitSelector::Train, &penalty()).unwrap().flatten();
        let numeric = numeric_grad(&p.flatten(), 1e-5, |x| {
            zilm_nll(&ZilmParams::from_flat(10, 5, x), &d, SplitSelector::Train, &penalty()).unwrap()
        });
        let worst = analytic.iter().zip(&numeric).map(|(a, n)| rel_err(*a, *n)).fold(0.0, f64::max);
        assert!(worst < 1e-4, "seed {seed}: worst relative error {worst:e}");
    }
}

#[test]
fn ktm_gradient_matches_central_differences() {
    let d = small(0, 10, 5, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut p = Ktm1Params::zeros(10, 5);
    p.user_weights = random_vec(&mut rng, 10, 1.0);
    p.item_weights = random_vec(&mut rng, 5, 1.0);
    p.context_weights = random_vec(&mut rng, p.context_weights.len(), 0.5);
    p.bias = 0.3;
    let analytic = ktm1_grad(&p, &d, SplitSelector::Train, &penalty()).unwrap().flatten();
    let numeric = numeric_grad(&p.flatten(), 1e-5, |x| {
        ktm1_nll(&Ktm1Params::from_flat(10, 5, x), &d, SplitSelector::Train, &penalty()).unwrap()
    });
    let worst = analytic.iter().zip(&numeric).map(|(a, n)| rel_err(*a, *n)).fold(0.0, f64::max);
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

/// Mean 3PL NLL over the train split, computed from scratch.
fn pure_irt_nll(p: &ZilmParams, d: &zilm::domain::Dataset) -> f64 {
    let mut sum = 0.0;
    let mut n = 0.0;
    for a in d.attempts_in(SplitSelector::Train) {
        let (s, i) = (a.student_id, a.item_id);
        let disc = (1.0 + p.a_raw[i].exp()).ln();
        let g = 0.15 * sigmoid(p.g_raw[i]);
        let prob = g + (1.0 - g) * sigmoid(disc * (p.theta[s] - p.b[i]));
        sum -= if a.y() { prob.ln() } else { (1.0 - prob).ln() };
        n += 1.0;
    }
    sum / n
}

#[test]
fn irt_is_the_vanishing_inflation_case() {
    let d = small(4, 40, 10, 8);
    for seed in 0..5 {
        let mut p = random_zilm(seed, 40, 10);
        p.w_pi = ZilmParams::irt_pi_weights();
        let ours = zilm_nll(&p, &d, SplitSelector::Train, &Penalty::none()).unwrap();
        let oracle = pure_irt_nll(&p, &d);
        assert!((ours - oracle).abs() < 1e-6, "seed {seed}: {ours} vs {oracle}");
    }
}

#[test]
fn all_correct_data_never_penalizes_ability() {
    let mut d = small(2, 20, 8, 6);
    for a in &mut d.attempts {
        a.outcome = zilm::domain::Outcome::Correct;
    }
    let mut p = random_zilm(1, 20, 8);
    p.w_pi = ZilmParams::irt_pi_weights();
    let g = zilm_grad(&p, &d, SplitSelector::Train, &Penalty::none()).unwrap();
    assert!(g.theta.iter().all(|&v| v <= 0.0), "{:?}", g.theta);
}

#[test]
fn item_curve_limits() {
    let mut p = ZilmParams::zeros(1, 1);
    p.g_raw[0] = 0.4;
    let g = 0.15 * sigmoid(0.4);
    assert_abs_diff_eq!(irt_prob(&p, 0, 0).unwrap(), g + (1.0 - g) / 2.0, epsilon = 1e-15);

    p.a_raw[0] = -60.0;
    for theta in [-5.0, 0.3, 7.0] {
        p.theta[0] = theta;
        assert_abs_diff_eq!(irt_prob(&p, 0, 0).unwrap(), g + (1.0 - g) / 2.0, epsilon = 1e-12);
    }

    let mut p = ZilmParams::zeros(1, 1);
    p.g_raw[0] = -60.0;
    p.a_raw[0] = 1f64.exp_m1().ln();
    assert_abs_diff_eq!(irt_prob(&p, 0, 0).unwrap(), 0.5, epsilon = 1e-12);
}

#[test]
fn inflation_caps_the_upper_asymptote() {
    let mut p = ZilmParams::zeros(1, 1);
    p.theta[0] = 50.0;
    p.a_raw[0] = 1.0;
    let top = irt_prob(&p, 0, 0).unwrap();
    for pi in [0.0, 0.1, 0.5, 0.9] {
        assert!((zilm_success_prob(pi, top).unwrap() - (1.0 - pi)).abs() < 1e-6);
    }
}

#[test]
fn ktm_examples() {
    let d = small(0, 3, 4, 2);
    let mut p = Ktm1Params::zeros(3, 4);
    p.bias = (0.734f64 / (1.0 - 0.734)).ln();
    for s in 0..3 {
        for i in 0..4 {
            assert_abs_diff_eq!(ktm1_prob(&p, &d, s, i).unwrap(), 0.734, epsilon = 1e-12);
        }
    }
    let mut last = 0.0;
    for u in [-2.0, -0.5, 0.0, 0.1, 3.0] {
        p.user_weights[1] = u;
        let v = ktm1_prob(&p, &d, 1, 2).unwrap();
        assert!(v > last);
        last = v;
    }
}

#[test]
fn ktm_flipped_labels_mirror_negated_weights() {
    let d = small(6, 15, 6, 4);
    let mut flipped = d.clone();
    for a in &mut flipped.attempts {
        a.outcome = if a.y() { zilm::domain::Outcome::Incorrect } else { zilm::domain::Outcome::Correct };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut p = Ktm1Params::zeros(15, 6);
    p.user_weights = random_vec(&mut rng, 15, 1.0);
    p.item_weights = random_vec(&mut rng, 6, 1.0);
    p.context_weights = random_vec(&mut rng, p.context_weights.len(), 1.0);
    p.bias = -0.7;
    let neg = Ktm1Params::from_flat(15, 6, &p.flatten().iter().map(|v| -v).collect::<Vec<_>>());
    let a = ktm1_nll(&p, &d, SplitSelector::All, &Penalty::none()).unwrap();
    let b = ktm1_nll(&neg, &flipped, SplitSelector::All, &Penalty::none()).unwrap();
    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
}

#[test]
fn ktm_separable_pair_vanishes_with_scale() {
    let d = hand_dataset(2, 1, &[(0, 0, true, Split::Train), (1, 0, false, Split::Train)]);
    let mut prev = f64::INFINITY;
    for scale in [1.0, 4.0, 16.0] {
        let mut p = Ktm1Params::zeros(2, 1);
        p.user_weights = vec![scale, -scale];
        let nll = ktm1_nll(&p, &d, SplitSelector::Train, &Penalty::none()).unwrap();
        assert!(nll < prev);
        prev = nll;
    }
    assert!(prev < 1e-6);
}

proptest! {
    #[test]
    fn mixture_branches_sum_to_one(pi in 0.0f64..=1.0, p in 0.0f64..=1.0) {
        let s = zilm_success_prob(pi, p).unwrap();
        let f = zilm_failure_prob(pi, p).unwrap();
        prop_assert!((s + f - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn out_of_range_probabilities_are_rejected(pi in 1.0001f64..5.0, p in 0.0f64..=1.0) {
        prop_assert!(zilm_success_prob(pi, p).is_err());
        prop_assert!(zilm_success_prob(p, -pi).is_err());
    }
}
