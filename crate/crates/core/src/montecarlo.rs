//! Seeded simulation of the walks, used to cross-check the exact results.
//!
//! Trajectory `i` of a batch draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`, so batches give the same answer for any thread count.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Weight;
use crate::prob::KernelRow;
use crate::walk::StepDistribution;

/// Row sums further than this from 1 are rejected.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub start: Weight,
    /// `points[0]` is the start.
    pub points: Vec<Weight>,
    /// First index with a non-dominant point.
    pub exited_at: Option<usize>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inverse-CDF sampler over a fixed ordering.
#[derive(Clone, Debug)]
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Self {
        let total: f64 = probs.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Sampler { cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

pub fn simulate_walk(sd: &StepDistribution, start: &Weight, n: usize, seed: u64) -> Trajectory {
    walk_with(sd, &Sampler::new(&sd.probs_f64()), start, n, &mut rng_for(seed, 0))
}

fn walk_with(sd: &StepDistribution, sampler: &Sampler, start: &Weight, n: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let rs = sd.rep.root_system();
    let mut points = Vec::with_capacity(n + 1);
    points.push(start.clone());
    let mut exited_at = (!rs.is_dominant(start)).then_some(0);
    for k in 1..=n {
        let s = sampler.sample(rng);
        let next = &points[k - 1] + &sd.rep.steps[s];
        if exited_at.is_none() && !rs.is_dominant(&next) {
            exited_at = Some(k);
        }
        points.push(next);
    }
    Trajectory {
        start: start.clone(),
        points,
        exited_at,
    }
}

/// Counts of each step index over `draws` samples of one seeded stream.
pub fn step_frequencies(sd: &StepDistribution, draws: usize, seed: u64) -> Vec<u64> {
    let sampler = Sampler::new(&sd.probs_f64());
    let mut rng = rng_for(seed, 0);
    let mut counts = vec![0u64; sd.rep.dim()];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng)] += 1;
    }
    counts
}

/// Survival estimate `(p̂, √(p̂(1−p̂)/trials))` for `P[λ + S(k) ∈ C̄, k ≤ n]`.
pub fn estimate_survival(sd: &StepDistribution, lam: &Weight, n: usize, trials: usize, seed: u64) -> Result<(f64, f64)> {
    let rs = sd.rep.root_system();
    let start = rs.integer_labels(lam)?;
    if start.iter().any(|&l| l < 0) {
        return Ok((0.0, 0.0));
    }
    let sampler = Sampler::new(&sd.probs_f64());
    let deltas = sd.rep.step_labels();
    let survived: u64 = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let mut labels = start.clone();
            for _ in 0..n {
                let s = sampler.sample(&mut rng);
                let mut ok = true;
                for (l, d) in labels.iter_mut().zip(&deltas[s]) {
                    *l += d;
                    ok &= *l >= 0;
                }
                if !ok {
                    return 0;
                }
            }
            1
        })
        .sum();
    let p = survived as f64 / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

fn check_row(row: &KernelRow) -> Result<()> {
    let sum = row.total().to_f64();
    if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE || row.entries.iter().any(|(_, p)| !p.is_positive()) {
        return Err(Error::NonStochasticRow {
            source_weight: row.source.to_string(),
            sum,
        });
    }
    Ok(())
}

struct CachedRow {
    targets: Vec<Weight>,
    sampler: Sampler,
}

/// Memoized, validated rows from a provider.
struct RowCache<'p, F> {
    provider: &'p F,
    rows: Mutex<HashMap<Weight, std::sync::Arc<CachedRow>>>,
}

impl<'p, F> RowCache<'p, F>
where
    F: Fn(&Weight) -> Result<KernelRow> + Sync,
{
    fn new(provider: &'p F) -> Self {
        RowCache {
            provider,
            rows: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, w: &Weight) -> Result<std::sync::Arc<CachedRow>> {
        if let Some(r) = self.rows.lock().unwrap().get(w) {
            return Ok(r.clone());
        }
        let row = (self.provider)(w)?;
        check_row(&row)?;
        let probs: Vec<f64> = row.entries.iter().map(|(_, p)| p.to_f64()).collect();
        let cached = std::sync::Arc::new(CachedRow {
            targets: row.entries.into_iter().map(|(t, _)| t).collect(),
            sampler: Sampler::new(&probs),
        });
        self.rows.lock().unwrap().insert(w.clone(), cached.clone());
        Ok(cached)
    }
}

fn conditioned_with<F>(cache: &RowCache<'_, F>, start: &Weight, n: usize, rng: &mut ChaCha8Rng) -> Result<Trajectory>
where
    F: Fn(&Weight) -> Result<KernelRow> + Sync,
{
    let mut points = Vec::with_capacity(n + 1);
    points.push(start.clone());
    for k in 0..n {
        let row = cache.get(&points[k])?;
        let next = row.targets[row.sampler.sample(rng)].clone();
        points.push(next);
    }
    Ok(Trajectory {
        start: start.clone(),
        points,
        exited_at: None,
    })
}

/// A trajectory of the chain whose rows come from `row_provider`.
pub fn simulate_conditioned<F>(row_provider: &F, start: &Weight, n: usize, seed: u64) -> Result<Trajectory>
where
    F: Fn(&Weight) -> Result<KernelRow> + Sync,
{
    conditioned_with(&RowCache::new(row_provider), start, n, &mut rng_for(seed, 0))
}

/// Transitions observed out of `at` over `trials` conditioned trajectories of
/// length `n` from `start`: `(targets, counts)`.
pub fn successor_frequencies<F>(
    row_provider: &F,
    start: &Weight,
    at: &Weight,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(Vec<Weight>, Vec<u64>)>
where
    F: Fn(&Weight) -> Result<KernelRow> + Sync,
{
    let cache = RowCache::new(row_provider);
    let targets = cache.get(at)?.targets.clone();
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let traj = conditioned_with(&cache, start, n, &mut rng_for(seed, i))?;
            let mut c = vec![0u64; targets.len()];
            for w in traj.points.windows(2).filter(|w| &w[0] == at) {
                let j = targets.iter().position(|t| t == &w[1]).expect("target of the cached row");
                c[j] += 1;
            }
            Ok(c)
        })
        .try_reduce(
            || vec![0u64; targets.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok((targets, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_root_system, Family};
    use crate::prob::Prob;
    use crate::reps::build_minuscule;
    use crate::walk::{kernel_zero_drift, step_distribution, Theta};

    fn b3_sd(theta: Theta) -> StepDistribution {
        let rep = build_minuscule(&build_root_system(Family::B, 3).unwrap(), 3).unwrap();
        step_distribution(&rep, &theta).unwrap()
    }

    #[test]
    fn trajectories_are_reproducible() {
        let sd = b3_sd(Theta::ones(3));
        let a = simulate_walk(&sd, &Weight::zero(3), 50, 7);
        let b = simulate_walk(&sd, &Weight::zero(3), 50, 7);
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 51);
        for w in a.points.windows(2) {
            assert!(sd.rep.step_index.contains_key(&(&w[1] - &w[0])));
        }
        let rs = sd.rep.root_system();
        if let Some(k) = a.exited_at {
            assert!(!rs.is_dominant(&a.points[k]));
            assert!(a.points[..k].iter().all(|p| rs.is_dominant(p)));
        }
        assert_eq!(simulate_walk(&sd, &Weight::zero(3), 0, 1).points, vec![Weight::zero(3)]);
    }

    #[test]
    fn uniform_step_frequencies() {
        let sd = b3_sd(Theta::ones(3));
        let draws = 400_000;
        let counts = step_frequencies(&sd, draws, 11);
        let p = 1.0 / 8.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn survival_estimates() {
        let rs = build_root_system(Family::A, 1).unwrap();
        let rep = build_minuscule(&rs, 1).unwrap();
        let sd = step_distribution(&rep, &Theta::ones(1)).unwrap();
        assert_eq!(estimate_survival(&sd, &Weight::zero(2), 0, 10, 1).unwrap(), (1.0, 0.0));
        let (p, se) = estimate_survival(&sd, &Weight::zero(2), 4, 200_000, 3).unwrap();
        assert!((p - 0.375).abs() < 4.0 * se);
        let again = estimate_survival(&sd, &Weight::zero(2), 4, 200_000, 3).unwrap();
        assert_eq!((p, se), again);
    }

    #[test]
    fn conditioned_walks_stay_dominant() {
        let sd = b3_sd(Theta::ones(3));
        let rep = sd.rep.clone();
        let provider = |w: &Weight| kernel_zero_drift(&rep, w);
        let t = simulate_conditioned(&provider, &Weight::zero(3), 30, 5).unwrap();
        assert_eq!(t.points[1], rep.delta);
        assert!(t.points.iter().all(|p| rep.root_system().is_dominant(p)));
        assert_eq!(t.exited_at, None);
        assert_eq!(t, simulate_conditioned(&provider, &Weight::zero(3), 30, 5).unwrap());
    }

    #[test]
    fn non_stochastic_rows_are_rejected() {
        let bad = |w: &Weight| Ok(KernelRow::new(w.clone(), vec![(w.clone(), Prob::Float(0.5))]));
        assert!(matches!(
            simulate_conditioned(&bad, &Weight::zero(3), 3, 1),
            Err(Error::NonStochasticRow { .. })
        ));
    }
}
