//! The perturbed running maximum and the functional applied to the scaled
//! walk plus the empirical perturbation measure are the same object, and the
//! implementations must agree bit for bit: same jump times, same jump
//! values, same evaluations, across every replica and walk length.

use permax_core::functional;
use permax_core::rng::RngStream;
use permax_core::walk::{
    self, draw_etas, draw_steps, empirical_point_measure, perturbed_max_path,
    perturbed_max_path_from_draws, scaled_walk_path_from_draws, WalkConfig,
};
use permax_core::{TailLaw, XiLaw};

fn exact_match(seed: u64, index: u64, xi: &XiLaw, tail: &TailLaw, n: u64, horizon: f64) {
    let cfg = WalkConfig::new(*xi, *tail, n, horizon).unwrap();
    let rng = RngStream::new(seed, index);
    let steps = cfg.steps() as usize;
    let xis = draw_steps(&rng, xi, steps);
    let etas = draw_etas(&rng, tail, steps + 1);

    let direct = perturbed_max_path(&rng, &cfg);
    let from_draws = perturbed_max_path_from_draws(&xis, &etas, n, tail.a(), horizon);
    assert_eq!(direct, from_draws, "lane draws drifted at n = {n}");

    let f = scaled_walk_path_from_draws(&xis, n, horizon);
    let nu = empirical_point_measure(&etas, n, tail.a(), walk::RETAIN_ALL, horizon).unwrap();
    let replay = functional::path(&f, &nu).unwrap();
    assert_eq!(direct, replay, "functional replay differs at n = {n}");

    let nf = n as f64;
    for k in (0..=steps as u64).step_by((steps / 7).max(1)) {
        let t = k as f64 / nf;
        assert_eq!(
            direct.eval(t).unwrap(),
            functional::eval(&f, &nu, t).unwrap(),
            "eval differs at t = {t}, n = {n}"
        );
    }
    assert_eq!(direct.terminal(), replay.terminal());
}

#[test]
fn functional_replays_the_perturbed_maximum_exactly() {
    let tail = TailLaw::default();
    for (index, xi) in [
        XiLaw::rademacher(1.0).unwrap(),
        XiLaw::uniform_centered(0.7).unwrap(),
        XiLaw::gaussian(1.3).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        for n in [10u64, 100, 1000] {
            for seed in 0..40 {
                exact_match(seed, index as u64, xi, &tail, n, 1.0);
            }
        }
        exact_match(7, index as u64, xi, &tail, 10_000, 1.0);
    }
}

#[test]
fn replay_holds_off_the_unit_horizon_and_heavier_tails() {
    let tail = TailLaw::new(0.4, 1.5).unwrap();
    let xi = XiLaw::rademacher(1.0).unwrap();
    for seed in 0..20 {
        exact_match(seed, 0, &xi, &tail, 64, 0.77);
        exact_match(seed, 1, &xi, &tail, 250, 2.5);
    }
}

#[test]
fn degenerate_walk_replays_the_scaled_perturbation_maximum() {
    // with xi = 0 the walk contributes nothing and the perturbed maximum is
    // the running maximum of the scaled perturbations alone
    let tail = TailLaw::default();
    let xi = XiLaw::gaussian(0.0).unwrap();
    let n = 400u64;
    let cfg = WalkConfig::new(xi, tail, n, 1.0).unwrap();
    let rng = RngStream::new(99, 3);
    let path = perturbed_max_path(&rng, &cfg);
    let etas = draw_etas(&rng, &tail, cfg.steps() as usize + 1);
    let ms = walk::mark_scale(n, tail.a());
    let mut best = f64::NEG_INFINITY;
    for (k, eta) in etas.iter().enumerate() {
        let term = 0.0 + ms * eta;
        if term > best {
            best = term;
        }
        let t = k as f64 / n as f64;
        assert_eq!(path.eval(t).unwrap(), best, "k = {k}");
    }
}
