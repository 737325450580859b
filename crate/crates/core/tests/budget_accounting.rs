//! Full-budget accounting on the 8-dimensional demo space with a cheap
//! analytic stand-in objective: 480 evaluations as 3 replicates per new
//! configuration under noise handling, with a 3-per-dimension initial design.

use smbo::evaluation::FnObjective;
use smbo::space::SearchSpace;
use smbo::tuner::{best_trace, tune, ControlConfig};

#[test]
fn full_preset_budget_is_consumed_exactly() {
    let space = SearchSpace::preset("section34").unwrap();
    // Smooth deterministic response over the natural scale, standing in for
    // a network training run.
    let objective = FnObjective::new(space.clone(), |x: &[f64]| {
        let lr_term = (x[4].log10() + 3.0).powi(2); // best near lr = 1e-3
        let dropout_term = (x[0] - 0.35) * (x[0] - 0.35) + (x[1] - 0.25) * (x[1] - 0.25);
        let width_term = ((x[2] - 256.0) / 512.0).powi(2);
        0.05 + lr_term * 0.2 + dropout_term + width_term
    });
    let control = ControlConfig {
        fun_evals: 480,
        repeats: 3,
        noise: true,
        // keep the proposal search light; accounting is what matters here
        candidate_pool: 200,
        local_refine: 4,
        ..ControlConfig::new(&space, 480)
    }
    .with_seed(480);
    assert_eq!(control.design_size, 24);

    let result = tune(&objective, &space, &control).unwrap();
    assert_eq!(result.count, 480);
    assert_eq!(result.msg, "budget exhausted");
    assert_eq!(result.x.len(), 480);
    assert_eq!(result.y.len(), 480);
    assert_eq!(result.ybest_vec.len(), 480 - 24 * 3);
    for w in result.ybest_vec.windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert_eq!(*result.ybest_vec.last().unwrap(), result.ybest);
    assert_eq!(best_trace(&result), result.ybest_vec);

    let fit = result.model_fit.expect("final surrogate summary");
    assert_eq!(fit.types.len(), 8);
    assert_eq!(
        fit.types,
        ["numeric", "numeric", "integer", "integer", "numeric", "integer", "integer", "numeric"]
    );
    assert!(fit.theta.iter().all(|&t| (1e-4..=100.0).contains(&t)));
}
