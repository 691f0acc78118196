//! Fixtures shared by the benchmarks.

use c2lse::problems::LevelSetProblem;
use c2lse::search::sample_initial_design;
use c2lse::{GPosterior, KernelSpec, ObservationSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A posterior on MC2D conditioned on `t` Latin-hypercube observations.
pub fn mc2d_posterior(t: usize) -> (LevelSetProblem, GPosterior) {
    let problem = LevelSetProblem::mc2d();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut obs = ObservationSet::new(problem.noise_variance).expect("positive noise");
    for x in sample_initial_design(&problem.bounds, t, 11).expect("valid design") {
        let y = problem.observe(&x, &mut rng).expect("in bounds");
        obs.push(x, y).expect("finite");
    }
    let kernel = KernelSpec::isotropic(Default::default(), 2, 1.0, 0.5).expect("valid kernel");
    let gp = GPosterior::fit_with_prior_mean(kernel, obs, problem.threshold).expect("positive definite");
    (problem, gp)
}
