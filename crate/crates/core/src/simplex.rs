//! Bounded Nelder-Mead search on the unit box with seeded random restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Stop once every vertex lies within this distance of the best one.
    pub diameter_tolerance: f64,
    /// Evaluation budget per run.
    pub max_evaluations: usize,
    /// Number of extra runs started from uniformly random points.
    pub restarts: usize,
    /// Edge length of the initial simplex.
    pub initial_size: f64,
    pub seed: u64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            diameter_tolerance: 1e-8,
            max_evaluations: 10_000,
            restarts: 5,
            initial_size: 0.1,
            seed: 0x5eed_2005,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn clamp_unit(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

fn eval(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// One Nelder-Mead run from `start` with candidates projected onto `[0, 1]^n`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = start.len();
    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(&mut f, &x0);
    simplex.push((x0.clone(), v0));
    for i in 0..n {
        let mut x = x0.clone();
        // Step inward when the start sits on the upper face.
        x[i] = if x0[i] + opts.initial_size <= 1.0 {
            x0[i] + opts.initial_size
        } else {
            x0[i] - opts.initial_size
        };
        let v = eval(&mut f, &x);
        simplex.push((x, v));
    }
    let mut evaluations = n + 1;
    let mut converged = false;

    let point = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
        clamp_unit(&mut p);
        p
    };

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < opts.diameter_tolerance {
            converged = true;
            break;
        }
        if evaluations >= opts.max_evaluations {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let (worst, worst_value) = simplex[n].clone();
        let best_value = simplex[0].1;
        let second_worst = simplex[n - 1].1;

        let reflected = point(&centroid, &worst, -1.0);
        let reflected_value = eval(&mut f, &reflected);
        evaluations += 1;

        if reflected_value < best_value {
            let expanded = point(&centroid, &worst, -2.0);
            let expanded_value = eval(&mut f, &expanded);
            evaluations += 1;
            simplex[n] = if expanded_value < reflected_value {
                (expanded, expanded_value)
            } else {
                (reflected, reflected_value)
            };
            continue;
        }
        if reflected_value < second_worst {
            simplex[n] = (reflected, reflected_value);
            continue;
        }
        let (contracted, contracted_value) = if reflected_value < worst_value {
            let c = point(&centroid, &reflected, 0.5);
            let v = eval(&mut f, &c);
            (c, v)
        } else {
            let c = point(&centroid, &worst, 0.5);
            let v = eval(&mut f, &c);
            (c, v)
        };
        evaluations += 1;
        if contracted_value < worst_value.min(reflected_value) {
            simplex[n] = (contracted, contracted_value);
            continue;
        }
        // Shrink towards the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = point(&best, &vertex.0, 0.5);
            let v = eval(&mut f, &x);
            *vertex = (x, v);
        }
        evaluations += n;
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    SimplexResult {
        point,
        value,
        evaluations,
        converged,
    }
}

/// Runs from `start`, then from `opts.restarts` random points, then polishes the
/// best result with one more run from its location. Returns the lowest value seen.
pub fn minimize_with_restarts(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = nelder_mead(&mut f, start, opts);
    let mut evaluations = best.evaluations;
    for _ in 0..opts.restarts {
        let x: Vec<f64> = (0..start.len()).map(|_| rng.gen::<f64>()).collect();
        let run = nelder_mead(&mut f, &x, opts);
        evaluations += run.evaluations;
        if run.value < best.value {
            best = run;
        }
    }
    let polish = nelder_mead(&mut f, &best.point.clone(), opts);
    evaluations += polish.evaluations;
    if polish.value <= best.value {
        best = SimplexResult {
            converged: polish.converged || best.converged,
            ..polish
        };
    }
    best.evaluations = evaluations;
    best
}
