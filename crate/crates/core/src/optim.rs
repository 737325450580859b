//! Box-constrained Nelder-Mead simplex search.
//!
//! Used for refining correlation-length estimates and expected-improvement
//! candidates. Vertices are clamped into the box after every move, which is
//! adequate for the small, smooth problems it is applied to here.

/// Minimizes `f` inside `[lower, upper]^d` starting from `start`, spending at
/// most `max_evals` function evaluations. Returns the best point and value.
pub fn nelder_mead<F>(
    f: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..d {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };

    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // Initial simplex: start plus a perturbation of 5% of the box width per axis.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    let v0 = eval(&x0);
    simplex.push((x0.clone(), v0));
    for i in 0..d {
        let mut x = x0.clone();
        let step = 0.05 * (upper[i] - lower[i]);
        x[i] = if x[i] + step <= upper[i] {
            x[i] + step
        } else {
            x[i] - step
        };
        clamp(&mut x);
        let v = eval(&x);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (worst - best).abs() <= 1e-12 * (1.0 + best.abs()) {
            break;
        }

        let mut centroid = vec![0.0; d];
        for (x, _) in simplex.iter().take(d) {
            for i in 0..d {
                centroid[i] += x[i] / d as f64;
            }
        }

        let mut reflected: Vec<f64> = (0..d)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[d].0[i]))
            .collect();
        clamp(&mut reflected);
        let v_r = eval(&reflected);

        if v_r < simplex[0].1 {
            let mut expanded: Vec<f64> = (0..d)
                .map(|i| centroid[i] + gamma * (reflected[i] - centroid[i]))
                .collect();
            clamp(&mut expanded);
            let v_e = eval(&expanded);
            simplex[d] = if v_e < v_r {
                (expanded, v_e)
            } else {
                (reflected, v_r)
            };
        } else if v_r < simplex[d - 1].1 {
            simplex[d] = (reflected, v_r);
        } else {
            let mut contracted: Vec<f64> = (0..d)
                .map(|i| centroid[i] + rho * (simplex[d].0[i] - centroid[i]))
                .collect();
            clamp(&mut contracted);
            let v_c = eval(&contracted);
            if v_c < simplex[d].1 {
                simplex[d] = (contracted, v_c);
            } else {
                // shrink towards the best vertex
                let best_x = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for i in 0..d {
                        vertex.0[i] = best_x[i] + sigma * (vertex.0[i] - best_x[i]);
                    }
                    vertex.1 = eval(&vertex.0);
                    if evals.get() >= max_evals {
                        break;
                    }
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}
