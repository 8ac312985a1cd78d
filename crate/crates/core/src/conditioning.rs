//! Finite-horizon conditioning: path counts, survival probabilities `ψ_n`,
//! the ratios `h_n`, finite-horizon kernels, convergence series and tail fits.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, BigUint, One, Zero};

use crate::engine::{Dp, Layer};
use crate::error::{Error, Result};
use crate::lattice::Weight;
use crate::prob::{KernelRow, Prob};
use crate::reps::{successors, MinusculeRep};
use crate::walk::{step_distribution, Theta};

/// Default bound on the number of states in one DP layer.
pub const DEFAULT_STATE_CAP: usize = 20_000_000;
/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "WEYLWALK_STATE_CAP";
/// Largest horizon computed exactly by [`Precision::Auto`] at `θ = 1^d`.
pub const AUTO_EXACT_HORIZON: usize = 200;
/// Largest horizon computed exactly by [`Precision::Auto`] at other `θ`.
pub const AUTO_EXACT_HORIZON_DRIFTED: usize = 48;
/// Exact tables keep their layers up to this horizon by default.
pub const KEEP_LAYERS_HORIZON: usize = 64;

/// Arithmetic used by the DP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Big-integer path counts, exact rational `ψ`.
    Exact,
    /// Probability mass in `f64`.
    Float,
    /// Exact up to a horizon that depends on `θ`, float beyond.
    Auto,
}

impl Precision {
    fn is_exact(self, theta: &Theta, n: usize) -> bool {
        match self {
            Precision::Exact => true,
            Precision::Float => false,
            Precision::Auto if theta.is_one() => n <= AUTO_EXACT_HORIZON,
            Precision::Auto => n <= AUTO_EXACT_HORIZON_DRIFTED,
        }
    }
}

/// The state cap from the environment, or the default.
pub fn state_cap() -> usize {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

#[derive(Clone, Copy, Debug)]
pub struct SurvivalOptions {
    pub precision: Precision,
    pub keep_layers: bool,
    pub state_cap: usize,
}

impl Default for SurvivalOptions {
    fn default() -> Self {
        SurvivalOptions {
            precision: Precision::Auto,
            keep_layers: false,
            state_cap: state_cap(),
        }
    }
}

/// Survival data for one start.
#[derive(Clone, Debug)]
pub struct SurvivalTable {
    pub rep: MinusculeRep,
    pub theta: Theta,
    pub start: Weight,
    pub horizon: usize,
    /// `ψ_k(λ₀)` for `k = 0..=horizon`.
    pub psi: Vec<Prob>,
    /// Path counts `f^k_{Λ/λ₀}` per layer, sorted by weight. Present only for
    /// exact tables built with `keep_layers`.
    pub layers: Option<Vec<Vec<(Weight, BigUint)>>>,
    /// Relative error bound on float `ψ` values (zero when exact).
    pub rel_error: f64,
}

impl SurvivalTable {
    pub fn psi_at(&self, k: usize) -> &Prob {
        &self.psi[k]
    }

    pub fn last(&self) -> &Prob {
        &self.psi[self.horizon]
    }

    pub fn is_exact(&self) -> bool {
        self.rel_error == 0.0
    }
}

/// Context shared by every DP run over one representation.
struct Walker<'a> {
    rep: &'a MinusculeRep,
    theta: &'a Theta,
    dp: Dp,
    delta_labels: Vec<i64>,
}

impl<'a> Walker<'a> {
    fn new(rep: &'a MinusculeRep, theta: &'a Theta, cap: usize) -> Result<Self> {
        let sd = step_distribution(rep, theta)?;
        Ok(Walker {
            rep,
            theta,
            dp: Dp::new(rep, sd.probs_f64(), cap),
            delta_labels: rep.delta_labels(),
        })
    }

    fn labels(&self, w: &Weight) -> Result<Vec<i64>> {
        let rs = self.rep.root_system();
        if !rs.is_dominant(w) {
            return Err(Error::NotDominant(w.to_string()));
        }
        rs.integer_labels(w)
    }

    fn float_error(&self, n: usize) -> f64 {
        ((n * (self.rep.dim() + 1) + 64) as f64) * f64::EPSILON
    }

    /// `ψ_k` for each start and `k = 0..=n`: `psi[t][k]`.
    fn psi_series(&self, starts: &[Vec<i64>], n: usize, exact: bool) -> Result<Vec<Vec<Prob>>> {
        let m = starts.len();
        let mut psi = vec![Vec::with_capacity(n + 1); m];
        if exact {
            let mut weigher = ExactWeigher::new(self, starts);
            self.dp.run::<BigUint>(starts, n, |k, layer| {
                for (t, v) in weigher.layer_psi(k, layer).into_iter().enumerate() {
                    psi[t].push(Prob::Exact(v));
                }
                Ok(())
            })?;
        } else {
            self.dp.run::<f64>(starts, n, |_, layer| {
                for (t, series) in psi.iter_mut().enumerate() {
                    let col: Vec<f64> = (0..layer.len()).map(|j| layer.row(j)[t]).collect();
                    series.push(Prob::Float(pairwise_sum(&col)));
                }
                Ok(())
            })?;
        }
        Ok(psi)
    }
}

/// Exact `ψ_k = Σ_Λ f^k_Λ θ^{c(kδ − (Λ − λ₀))} / Σ^k`.
///
/// With `θᵢ = aᵢ/bᵢ` each weight is cleared of denominators as
/// `Π aᵢ^{cᵢ} bᵢ^{kMᵢ − cᵢ}` against `Z = Σ_s Π aᵢ^{mᵢ} bᵢ^{Mᵢ − mᵢ}`, where
/// `M` bounds the step exponents.
struct ExactWeigher<'w, 'a> {
    walker: &'w Walker<'a>,
    starts: Vec<Vec<i64>>,
    uniform: Option<BigUint>,
    nums: Vec<BigInt>,
    dens: Vec<BigInt>,
    max_exp: Vec<u32>,
    z: BigInt,
    num_pows: Vec<Vec<BigInt>>,
    den_pows: Vec<Vec<BigInt>>,
    z_pow: BigInt,
}

impl<'w, 'a> ExactWeigher<'w, 'a> {
    fn new(walker: &'w Walker<'a>, starts: &[Vec<i64>]) -> Self {
        let d = walker.rep.root_system().rank;
        let theta = walker.theta.values();
        let nums: Vec<BigInt> = theta.iter().map(|t| t.numer().clone()).collect();
        let dens: Vec<BigInt> = theta.iter().map(|t| t.denom().clone()).collect();
        let max_exp: Vec<u32> = (0..d)
            .map(|i| walker.rep.step_exponents().iter().map(|m| m[i]).max().unwrap_or(0))
            .collect();
        let z = walker
            .rep
            .step_exponents()
            .iter()
            .map(|m| {
                (0..d)
                    .map(|i| num::pow(nums[i].clone(), m[i] as usize) * num::pow(dens[i].clone(), (max_exp[i] - m[i]) as usize))
                    .product::<BigInt>()
            })
            .sum();
        ExactWeigher {
            walker,
            starts: starts.to_vec(),
            uniform: walker.theta.is_one().then(|| BigUint::from(walker.rep.dim())),
            num_pows: nums.iter().map(|_| vec![BigInt::one()]).collect(),
            den_pows: dens.iter().map(|_| vec![BigInt::one()]).collect(),
            nums,
            dens,
            max_exp,
            z,
            z_pow: BigInt::one(),
        }
    }

    fn pow<'p>(table: &'p mut Vec<BigInt>, base: &BigInt, e: usize) -> &'p BigInt {
        while table.len() <= e {
            let next = table.last().unwrap() * base;
            table.push(next);
        }
        &table[e]
    }

    fn layer_psi(&mut self, k: usize, layer: &Layer<BigUint>) -> Vec<BigRational> {
        let m = self.starts.len();
        if let Some(dim) = &self.uniform {
            let den = BigInt::from(num::pow(dim.clone(), k));
            return (0..m)
                .map(|t| {
                    let total: BigUint = (0..layer.len()).map(|j| &layer.row(j)[t]).sum();
                    BigRational::new(total.into(), den.clone())
                })
                .collect();
        }
        if k > 0 {
            self.z_pow *= &self.z;
        }
        let rs = self.walker.rep.root_system();
        let d = rs.rank;
        let mut acc = vec![BigInt::zero(); m];
        for j in 0..layer.len() {
            let labels = self.walker.dp.unpack(layer.keys[j]);
            for t in 0..m {
                let f = &layer.row(j)[t];
                if f.is_zero() {
                    continue;
                }
                let diff: Vec<i64> = (0..d)
                    .map(|i| k as i64 * self.walker.delta_labels[i] - (labels[i] - self.starts[t][i]))
                    .collect();
                let c = rs.root_coords_from_labels(&diff);
                let mut w = BigInt::from(f.clone());
                for i in 0..d {
                    let ci = c[i] as usize;
                    w *= Self::pow(&mut self.num_pows[i], &self.nums[i], ci);
                    let rest = k * self.max_exp[i] as usize - ci;
                    w *= Self::pow(&mut self.den_pows[i], &self.dens[i], rest);
                }
                acc[t] += w;
            }
        }
        acc.into_iter()
            .map(|a| BigRational::new(a, self.z_pow.clone()))
            .collect()
    }
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Number of length-`n` paths `λ → Λ` with steps in `P(δ)` staying dominant.
pub fn count_paths(rep: &MinusculeRep, lam: &Weight, target: &Weight, n: usize) -> Result<BigUint> {
    let theta = Theta::ones(rep.root_system().rank);
    let walker = Walker::new(rep, &theta, state_cap())?;
    let start = walker.labels(lam)?;
    let goal = walker.labels(target)?;
    let rs = rep.root_system();
    let reach = rs.complement(&(&(lam + &rep.delta.scale(crate::Q::from_integer(n as i64))) - target));
    if !reach.is_zero() {
        return Ok(BigUint::zero());
    }
    let last = walker.dp.run::<BigUint>(&[start], n, |_, _| Ok(()))?;
    Ok(walker
        .dp
        .pack(&goal)
        .and_then(|key| last.find(key))
        .map(|j| last.row(j)[0].clone())
        .unwrap_or_default())
}

pub fn survival(rep: &MinusculeRep, theta: &Theta, lam: &Weight, n: usize) -> Result<SurvivalTable> {
    survival_with(rep, theta, lam, n, SurvivalOptions {
        keep_layers: n <= KEEP_LAYERS_HORIZON,
        ..SurvivalOptions::default()
    })
}

pub fn survival_with(
    rep: &MinusculeRep,
    theta: &Theta,
    lam: &Weight,
    n: usize,
    opts: SurvivalOptions,
) -> Result<SurvivalTable> {
    let walker = Walker::new(rep, theta, opts.state_cap)?;
    let start = walker.labels(lam)?;
    let exact = opts.precision.is_exact(theta, n);
    let rs = rep.root_system();
    let (psi, layers) = if exact && opts.keep_layers {
        let mut weigher = ExactWeigher::new(&walker, std::slice::from_ref(&start));
        let mut psi = Vec::with_capacity(n + 1);
        let mut layers = Vec::with_capacity(n + 1);
        let base = rs.complement(lam);
        let step = rs.complement(&rep.delta);
        walker.dp.run::<BigUint>(std::slice::from_ref(&start), n, |k, layer| {
            psi.push(Prob::Exact(weigher.layer_psi(k, layer).pop().unwrap()));
            let comp = &base + &step.scale(crate::Q::from_integer(k as i64));
            let mut entries: Vec<(Weight, BigUint)> = (0..layer.len())
                .map(|j| (rs.from_labels(&walker.dp.unpack(layer.keys[j]), &comp), layer.row(j)[0].clone()))
                .collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            layers.push(entries);
            Ok(())
        })?;
        (psi, Some(layers))
    } else {
        let psi = walker.psi_series(std::slice::from_ref(&start), n, exact)?.pop().unwrap();
        (psi, None)
    };
    Ok(SurvivalTable {
        rep: rep.clone(),
        theta: theta.clone(),
        start: lam.clone(),
        horizon: n,
        psi,
        layers,
        rel_error: if exact { 0.0 } else { walker.float_error(n) },
    })
}

/// `ψ_k(λ)` for several starts and `k = 0..=n` from a single DP.
pub fn psi_series(
    rep: &MinusculeRep,
    theta: &Theta,
    starts: &[Weight],
    n: usize,
    precision: Precision,
) -> Result<Vec<Vec<Prob>>> {
    let walker = Walker::new(rep, theta, state_cap())?;
    let labels = starts.iter().map(|w| walker.labels(w)).collect::<Result<Vec<_>>>()?;
    walker.psi_series(&labels, n, precision.is_exact(theta, n))
}

/// `h_n(λ) = ψ_n(λ)/ψ_n(0)`.
pub fn h_n(rep: &MinusculeRep, theta: &Theta, lam: &Weight, n: usize) -> Result<Prob> {
    let zero = Weight::zero(rep.root_system().ambient_dim);
    let series = psi_series(rep, theta, &[lam.clone(), zero], n, Precision::Auto)?;
    Ok(series[0][n].div(&series[1][n]))
}

/// Dominant weights reachable from 0 in exactly `k` steps, for `k = 0..layers`.
pub fn reachable_layers(rep: &MinusculeRep, layers: usize) -> Result<Vec<Vec<Weight>>> {
    let mut out = vec![vec![Weight::zero(rep.root_system().ambient_dim)]];
    for _ in 1..layers {
        let mut next = std::collections::BTreeSet::new();
        for lam in out.last().unwrap() {
            next.extend(successors(rep, lam)?);
        }
        out.push(next.into_iter().collect());
    }
    Ok(out)
}

/// The `i = 0` finite-horizon row `p(λ,Λ)ψ_{n−1}(Λ)/ψ_n(λ)`.
pub fn finite_horizon_row(rep: &MinusculeRep, theta: &Theta, lam: &Weight, n: usize) -> Result<KernelRow> {
    Ok(finite_horizon_rows(rep, theta, lam, &[n], Precision::Auto)?.pop().unwrap())
}

/// Finite-horizon rows at several horizons from one DP run.
pub fn finite_horizon_rows(
    rep: &MinusculeRep,
    theta: &Theta,
    lam: &Weight,
    horizons: &[usize],
    precision: Precision,
) -> Result<Vec<KernelRow>> {
    if let Some(&n) = horizons.iter().find(|&&n| n < 2) {
        return Err(Error::HorizonTooShort { n, min: 2 });
    }
    let Some(&n_max) = horizons.iter().max() else {
        return Ok(Vec::new());
    };
    let sd = step_distribution(rep, theta)?;
    let targets = successors(rep, lam)?;
    let series = psi_series(rep, theta, &targets, n_max - 1, precision)?;
    let step_probs: Vec<Prob> = targets
        .iter()
        .map(|t| Prob::Exact(sd.prob(&(t - lam)).expect("successor differs by a step").clone()))
        .collect();
    Ok(horizons
        .iter()
        .map(|&n| {
            let weights: Vec<Prob> = step_probs
                .iter()
                .zip(&series)
                .map(|(p, s)| p.mul(&s[n - 1]))
                .collect();
            let total = weights.iter().fold(Prob::zero(), |a, w| a.add(w));
            let entries = targets
                .iter()
                .cloned()
                .zip(weights.iter().map(|w| w.div(&total)))
                .collect();
            KernelRow::new(lam.clone(), entries)
        })
        .collect())
}

/// `n, 2n, 4n, …` up to `n_max`.
pub fn doubling_horizons(n: usize, n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = n.max(1);
    while k <= n_max {
        out.push(k);
        k *= 2;
    }
    out
}

/// One point of a convergence series.
#[derive(Clone, Debug)]
pub struct ConvergencePoint {
    pub n: usize,
    pub row: KernelRow,
    pub tv: f64,
    /// Aitken extrapolation of this row and the two before it.
    pub aitken_row: Option<KernelRow>,
    pub aitken_tv: Option<f64>,
}

/// TV distances between `finite_horizon_row(λ, n)` and `reference`.
pub fn convergence_series(
    rep: &MinusculeRep,
    theta: &Theta,
    lam: &Weight,
    horizons: &[usize],
    reference: &KernelRow,
    precision: Precision,
) -> Result<Vec<ConvergencePoint>> {
    let rows = finite_horizon_rows(rep, theta, lam, horizons, precision)?;
    let mut out: Vec<ConvergencePoint> = Vec::with_capacity(rows.len());
    for (i, (&n, row)) in horizons.iter().zip(&rows).enumerate() {
        let aitken_row = (i >= 2).then(|| aitken_rows(&rows[i - 2], &rows[i - 1], row));
        out.push(ConvergencePoint {
            n,
            tv: row.tv_distance(reference),
            aitken_tv: aitken_row.as_ref().map(|r| r.tv_distance(reference)),
            aitken_row,
            row: row.clone(),
        });
    }
    Ok(out)
}

/// Aitken's Δ² on three terms, falling back to the last one when the second
/// difference vanishes.
pub fn aitken(a0: f64, a1: f64, a2: f64) -> f64 {
    let d1 = a2 - a1;
    let d2 = d1 - (a1 - a0);
    if d2.abs() <= 1e-15 * (a0.abs() + a1.abs() + a2.abs()).max(f64::MIN_POSITIVE) {
        a2
    } else {
        a2 - d1 * d1 / d2
    }
}

/// Entrywise Aitken extrapolation of three rows over the union of targets.
pub fn aitken_rows(r0: &KernelRow, r1: &KernelRow, r2: &KernelRow) -> KernelRow {
    let mut cols: BTreeMap<Weight, [f64; 3]> = BTreeMap::new();
    for (k, r) in [r0, r1, r2].iter().enumerate() {
        for (w, p) in &r.entries {
            cols.entry(w.clone()).or_insert([0.0; 3])[k] = p.to_f64();
        }
    }
    let entries = cols
        .into_iter()
        .map(|(w, [a, b, c])| (w, Prob::Float(aitken(a, b, c))))
        .collect();
    KernelRow::new(r2.source.clone(), entries)
}

/// Least-squares fit of `ln ψ` against `ln n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailFit {
    pub lo: usize,
    pub hi: usize,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Fits over the points with `lo ≤ n ≤ hi`.
pub fn tail_fit(series: &[(usize, f64)], lo: usize, hi: usize) -> Result<TailFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(n, _)| (lo..=hi).contains(n))
        .map(|&(n, p)| (n as f64, p))
        .collect();
    if pts.len() < 2 || pts.iter().any(|&(n, p)| !(p > 0.0) || n <= 0.0) {
        return Err(Error::DegenerateWindow { lo, hi });
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(n, p)| (n.ln(), p.ln())).collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateWindow { lo, hi });
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xy
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(TailFit {
        lo,
        hi,
        points: xy.len(),
        slope,
        intercept,
        max_residual,
    })
}

/// `ψ` series as `(n, f64)` pairs, skipping `n = 0`.
pub fn psi_points(psi: &[Prob]) -> Vec<(usize, f64)> {
    psi.iter()
        .enumerate()
        .skip(1)
        .map(|(n, p)| (n, p.to_f64()))
        .collect()
}
