//! Box-constrained differential evolution (maximisation) with restarts.
//!
//! Trial vectors for a generation are drawn serially from one seeded stream
//! and then scored in parallel, so results do not depend on thread count.
//! Decisions never look at the remaining budget: a run with a larger budget
//! replays a smaller run exactly and then continues.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeSettings {
    pub population: usize,
    /// Differential weight range; a fresh weight is drawn per trial.
    pub weight: (f64, f64),
    pub crossover: f64,
    /// Generations without improvement of the population best before the
    /// population is redrawn around nothing but the incumbent.
    pub stall_generations: usize,
}

impl Default for DeSettings {
    fn default() -> Self {
        Self {
            population: 24,
            weight: (0.5, 0.9),
            crossover: 0.9,
            stall_generations: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeOutcome<T> {
    pub best: Vec<T>,
    pub value: T,
    pub evaluations: usize,
    pub restarts: usize,
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng, lo: T, hi: T) -> T {
    lo + (hi - lo) * T::lit(rng.gen::<f64>())
}

fn better<T: Real>(a: T, b: T) -> bool {
    a > b || (!b.is_finite() && a.is_finite())
}

/// Maximises `f` over the box `[lower, upper]` using at most `budget`
/// evaluations of `f`.
pub fn differential_evolution<T, F>(
    f: F,
    lower: &[T],
    upper: &[T],
    budget: usize,
    seed: u64,
    stream: u64,
    settings: &DeSettings,
) -> DeOutcome<T>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let dim = lower.len();
    let np = settings.population.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let mut out = DeOutcome {
        best: lower.iter().zip(upper).map(|(a, b)| (*a + *b) * T::lit(0.5)).collect(),
        value: T::neg_infinity(),
        evaluations: 0,
        restarts: 0,
    };
    if budget == 0 {
        return out;
    }

    let score = |batch: &[Vec<T>]| -> Vec<T> { batch.par_iter().map(|x| f(x)).collect() };

    let draw = |rng: &mut ChaCha8Rng| -> Vec<T> { (0..dim).map(|i| uniform(rng, lower[i], upper[i])).collect() };

    let mut pop: Vec<Vec<T>> = Vec::new();
    let mut fit: Vec<T> = Vec::new();
    let mut stall = 0usize;
    let mut pop_best = T::neg_infinity();

    while out.evaluations < budget {
        let fresh = pop.len() < np;
        let trials: Vec<Vec<T>> = if fresh {
            (pop.len()..np).map(|_| draw(&mut rng)).collect()
        } else {
            let best_idx = (0..np).fold(0, |b, i| if better(fit[i], fit[b]) { i } else { b });
            (0..np)
                .map(|i| {
                    let mut pick = || loop {
                        let j = rng.gen_range(0..np);
                        if j != i {
                            return j;
                        }
                    };
                    let (a, b) = (pick(), pick());
                    let w = T::lit(rng.gen_range(settings.weight.0..=settings.weight.1));
                    let forced = rng.gen_range(0..dim.max(1));
                    (0..dim)
                        .map(|k| {
                            let cross = k == forced || rng.gen::<f64>() < settings.crossover;
                            if !cross {
                                return pop[i][k];
                            }
                            // current-to-best/1
                            let v = pop[i][k] + w * (pop[best_idx][k] - pop[i][k]) + w * (pop[a][k] - pop[b][k]);
                            if v < lower[k] {
                                (pop[i][k] + lower[k]) * T::lit(0.5)
                            } else if v > upper[k] {
                                (pop[i][k] + upper[k]) * T::lit(0.5)
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let take = trials.len().min(budget - out.evaluations);
        let values = score(&trials[..take]);
        out.evaluations += take;

        for (i, (x, v)) in trials.into_iter().zip(values).enumerate() {
            if better(v, out.value) {
                out.value = v;
                out.best = x.clone();
            }
            if fresh {
                pop.push(x);
                fit.push(v);
            } else if !better(fit[i], v) {
                pop[i] = x;
                fit[i] = v;
            }
        }
        if pop.len() < np {
            break;
        }
        let current = fit.iter().copied().fold(T::neg_infinity(), |m, v| if better(v, m) { v } else { m });
        if better(current, pop_best) {
            pop_best = current;
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= settings.stall_generations {
            pop.clear();
            fit.clear();
            pop.push(out.best.clone());
            fit.push(out.value);
            pop_best = T::neg_infinity();
            stall = 0;
            out.restarts += 1;
        }
    }
    out
}
