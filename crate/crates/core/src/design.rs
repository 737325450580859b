//! Initial and baseline experimental designs on the unit hypercube.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::space::SearchSpace;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("design needs at least one point")]
    Empty,
    #[error("grid of {requested} points exceeds the cap of {cap}")]
    GridTooLarge { requested: u128, cap: usize },
    #[error("grid level counts must all be >= 1")]
    ZeroLevels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Lhs,
    Random,
    Grid,
}

/// An n x d matrix of unit-scale design points.
#[derive(Debug, Clone)]
pub struct Design {
    pub points: Vec<Vec<f64>>,
    pub generator: Generator,
    pub seed: u64,
}

impl Design {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of candidate draws entering the maximin selection.
const LHS_CANDIDATES: usize = 10;

/// Latin hypercube design: per dimension, exactly one point falls in each of
/// the n strata `[j/n, (j+1)/n)`. Among [`LHS_CANDIDATES`] seeded draws the
/// one with the largest minimum pairwise distance is kept.
pub fn latin_hypercube(space: &SearchSpace, n: usize, seed: u64) -> Result<Design, DesignError> {
    if n == 0 {
        return Err(DesignError::Empty);
    }
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for _ in 0..LHS_CANDIDATES {
        let candidate = lhs_draw(n, d, &mut rng);
        let score = min_pairwise_distance(&candidate);
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }
    Ok(Design {
        points: best.unwrap().1,
        generator: Generator::Lhs,
        seed,
    })
}

fn lhs_draw(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            points[i][j] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    points
}

fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            min = min.min(d2.sqrt());
        }
    }
    min
}

/// I.i.d. uniform design.
pub fn random_design(space: &SearchSpace, n: usize, seed: u64) -> Result<Design, DesignError> {
    if n == 0 {
        return Err(DesignError::Empty);
    }
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    Ok(Design {
        points,
        generator: Generator::Random,
        seed,
    })
}

/// Full factorial design; dimension i takes `levels[i]` equally spaced
/// stratum midpoints `(k + 0.5) / levels[i]`.
pub fn grid_design(
    space: &SearchSpace,
    levels_per_dim: &[usize],
    cap: usize,
) -> Result<Design, DesignError> {
    assert_eq!(
        levels_per_dim.len(),
        space.dim(),
        "one level count per dimension"
    );
    if levels_per_dim.iter().any(|&l| l == 0) {
        return Err(DesignError::ZeroLevels);
    }
    let total: u128 = levels_per_dim.iter().map(|&l| l as u128).product();
    if total > cap as u128 {
        return Err(DesignError::GridTooLarge {
            requested: total,
            cap,
        });
    }
    let d = space.dim();
    let mut points = Vec::with_capacity(total as usize);
    let mut index = vec![0usize; d];
    loop {
        points.push(
            (0..d)
                .map(|j| (index[j] as f64 + 0.5) / levels_per_dim[j] as f64)
                .collect(),
        );
        // odometer increment
        let mut j = 0;
        loop {
            if j == d {
                return Ok(Design {
                    points,
                    generator: Generator::Grid,
                    seed: 0,
                });
            }
            index[j] += 1;
            if index[j] < levels_per_dim[j] {
                break;
            }
            index[j] = 0;
            j += 1;
        }
    }
}
