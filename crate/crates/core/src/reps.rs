//! Minuscule representations: step sets, characters, dimensions and the
//! one-step relation `λ ⇝ Λ ⟺ Λ − λ ∈ P(δ)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{Family, RootSystem, Weight, DEFAULT_GROUP_CAP};
use crate::Q;

/// The minuscule representation `V(δ)` for `δ = ω_index`.
#[derive(Clone, Debug)]
pub struct MinusculeRep {
    root_system: RootSystem,
    index: usize,
    pub delta: Weight,
    /// `P(δ)` in lexicographic order.
    pub steps: Vec<Weight>,
    pub step_index: HashMap<Weight, usize>,
    /// Dynkin labels of each step, all in `{−1, 0, 1}`.
    step_labels: Vec<Vec<i64>>,
    /// Simple-root coordinates `m` of `δ − s` for each step.
    step_exponents: Vec<Vec<u32>>,
}

impl MinusculeRep {
    pub fn root_system(&self) -> &RootSystem {
        &self.root_system
    }

    /// 1-based index of `δ` among the fundamental weights.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.steps.len()
    }

    pub(crate) fn step_labels(&self) -> &[Vec<i64>] {
        &self.step_labels
    }

    /// `(mᵢ)` with `δ − s = Σ mᵢαᵢ`, in step order.
    pub fn step_exponents(&self) -> &[Vec<u32>] {
        &self.step_exponents
    }

    /// Dynkin labels of `δ`.
    pub(crate) fn delta_labels(&self) -> Vec<i64> {
        let mut l = vec![0; self.root_system.rank];
        l[self.index - 1] = 1;
        l
    }
}

/// Indices of the minuscule fundamental weights for the type.
pub fn minuscule_weights(rs: &RootSystem) -> Vec<usize> {
    let d = rs.rank;
    match rs.family {
        Family::A => (1..=d).collect(),
        Family::B => vec![d],
        Family::C => vec![1],
        Family::D => vec![1, d - 1, d],
        Family::E if d == 6 => vec![1, 6],
        Family::E if d == 7 => vec![7],
        _ => Vec::new(),
    }
}

pub fn build_minuscule(rs: &RootSystem, index: usize) -> Result<MinusculeRep> {
    if !minuscule_weights(rs).contains(&index) {
        return Err(Error::NotMinuscule { index });
    }
    let delta = rs.fundamental_weight(index).clone();
    let steps = rs.weyl_orbit(&delta)?;
    let step_index = steps
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let step_labels = steps
        .iter()
        .map(|s| rs.integer_labels(s))
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(step_labels.iter().flatten().all(|l| l.abs() <= 1));
    let step_exponents = steps
        .iter()
        .map(|s| {
            rs.decompose_in_simple_roots(&(&delta - s)).map(|c| {
                c.iter()
                    .map(|q| {
                        debug_assert!(q.is_integer() && !q.is_negative());
                        q.to_integer() as u32
                    })
                    .collect()
            })
        })
        .collect::<Result<Vec<Vec<u32>>>>()?;
    Ok(MinusculeRep {
        root_system: rs.clone(),
        index,
        delta,
        steps,
        step_index,
        step_labels,
        step_exponents,
    })
}

fn require_dominant(rs: &RootSystem, lam: &Weight) -> Result<()> {
    if lam.dim() != rs.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: rs.ambient_dim,
            got: lam.dim(),
        });
    }
    if !rs.is_dominant(lam) {
        return Err(Error::NotDominant(lam.to_string()));
    }
    Ok(())
}

/// Relative threshold on the cancellation in the alternating sum.
const MAX_CONDITION: f64 = 1e5;
/// Minimum `|⟨α, log x⟩|` before `x` is treated as lying on a wall.
const WALL_TOLERANCE: f64 = 1e-7;

/// `s_λ(x)` via the Weyl character formula.
///
/// `x` must be strictly positive and away from the reflection walls; at
/// `x = 1^D` use [`dim_irrep`].
pub fn char_eval(rs: &RootSystem, lam: &Weight, x: &[f64]) -> Result<f64> {
    require_dominant(rs, lam)?;
    if x.len() != rs.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: rs.ambient_dim,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::SingularPoint);
    }
    let log_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let pair = |w: &Weight| -> f64 { w.to_f64().iter().zip(&log_x).map(|(a, b)| a * b).sum() };

    let mut log_den = 0.0;
    let mut den_sign = 1.0;
    for alpha in &rs.positive_roots {
        let t = pair(alpha);
        if t.abs() < WALL_TOLERANCE {
            return Err(Error::SingularPoint);
        }
        let factor = 2.0 * (t / 2.0).sinh();
        log_den += factor.abs().ln();
        if factor < 0.0 {
            den_sign = -den_sign;
        }
    }
    if lam.is_zero() {
        return Ok(1.0);
    }

    let mu = lam + rs.rho();
    let orbit = rs.signed_orbit(&mu, DEFAULT_GROUP_CAP)?;
    let exps: Vec<(f64, i8)> = orbit.iter().map(|(w, s)| (pair(w), *s)).collect();
    let emax = exps.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    // Pairwise summation keeps the reduction order fixed.
    let terms: Vec<f64> = exps
        .iter()
        .map(|(e, s)| f64::from(*s) * (e - emax).exp())
        .collect();
    let num = pairwise_sum(&terms);
    let abs_sum: f64 = terms.iter().map(|t| t.abs()).sum();
    if num == 0.0 || abs_sum / num.abs() > MAX_CONDITION {
        return Err(Error::SingularPoint);
    }
    let value = den_sign * num.signum() * (emax + num.abs().ln() - log_den).exp();
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::SingularPoint);
    }
    Ok(value)
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// `dim V(λ)` by the Weyl dimension formula, in exact arithmetic.
pub fn dim_irrep(rs: &RootSystem, lam: &Weight) -> Result<BigInt> {
    require_dominant(rs, lam)?;
    let mu = lam + rs.rho();
    let mut num = BigRational::one();
    for alpha in &rs.positive_roots {
        num *= q_to_big(mu.dot(alpha)) / q_to_big(rs.rho().dot(alpha));
    }
    debug_assert!(num.is_integer());
    Ok(num.to_integer())
}

pub(crate) fn q_to_big(q: Q) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

/// Dominant `Λ` with `Λ − λ ∈ P(δ)`, in lexicographic order.
pub fn successors(rep: &MinusculeRep, lam: &Weight) -> Result<Vec<Weight>> {
    let rs = rep.root_system();
    require_dominant(rs, lam)?;
    let mut out: Vec<Weight> = rep
        .steps
        .iter()
        .map(|s| lam + s)
        .filter(|t| rs.is_dominant(t))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// `s_λ(x)s_δ(x) − Σ_{λ⇝Λ} s_Λ(x)`.
pub fn pieri_residual(rep: &MinusculeRep, lam: &Weight, x: &[f64]) -> Result<f64> {
    let rs = rep.root_system();
    let lhs = char_eval(rs, lam, x)? * char_eval(rs, &rep.delta, x)?;
    let rhs: f64 = successors(rep, lam)?
        .iter()
        .map(|t| char_eval(rs, t, x))
        .sum::<Result<f64>>()?;
    Ok(lhs - rhs)
}

/// `x^{−λ}s_λ(x)` written as a polynomial in `θ` through `x^{−αᵢ} = θᵢ`.
///
/// Coefficients are weight multiplicities, so the polynomial can be
/// evaluated exactly at any rational `θ`, including points on the walls
/// where the Weyl formula degenerates.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterPolynomial {
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl CharacterPolynomial {
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    /// Value at `θ = 1^d`, which is `dim V(λ)`.
    pub fn at_one(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn eval(&self, theta: &[BigRational]) -> BigRational {
        let d = theta.len();
        let mut max_exp = vec![0u32; d];
        for e in self.terms.keys() {
            for (m, &x) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(x);
            }
        }
        let powers: Vec<(Vec<BigInt>, Vec<BigInt>)> = theta
            .iter()
            .zip(&max_exp)
            .map(|(t, &m)| (power_table(t.numer(), m), power_table(t.denom(), m)))
            .collect();
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for i in 0..d {
                term *= &powers[i].0[e[i] as usize];
                term *= &powers[i].1[(max_exp[i] - e[i]) as usize];
            }
            acc += term;
        }
        let den: BigInt = (0..d)
            .map(|i| powers[i].1[max_exp[i] as usize].clone())
            .product();
        BigRational::new(acc, den)
    }

    pub fn eval_f64(&self, theta: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_f64().unwrap_or(f64::INFINITY)
                    * e.iter()
                        .zip(theta)
                        .map(|(&k, t)| t.powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

fn power_table(base: &BigInt, max: u32) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(BigInt::one());
    for k in 1..=max as usize {
        let next = &out[k - 1] * base;
        out.push(next);
    }
    out
}

fn root_exponents(rs: &RootSystem, v: &Weight) -> Result<Vec<u32>> {
    Ok(rs
        .decompose_in_simple_roots(v)?
        .iter()
        .map(|q| {
            debug_assert!(q.is_integer() && !q.is_negative());
            q.to_integer() as u32
        })
        .collect())
}

/// Computes `x^{−λ}s_λ(x)` as a polynomial in `θ`.
///
/// The alternating sum `Σ_w sign(w) θ^{c((λ+ρ) − w(λ+ρ))}` is divided exactly
/// by `Π_{α>0} (1 − θ^{c(α)})`.
pub fn normalized_character(rs: &RootSystem, lam: &Weight) -> Result<CharacterPolynomial> {
    require_dominant(rs, lam)?;
    let mu = lam + rs.rho();
    let mut poly: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
    for (w, sign) in rs.signed_orbit(&mu, DEFAULT_GROUP_CAP)? {
        let e = root_exponents(rs, &(&mu - &w))?;
        let c = poly.entry(e).or_insert_with(BigInt::zero);
        *c += i32::from(sign);
    }
    poly.retain(|_, c| !c.is_zero());
    for alpha in &rs.positive_roots {
        let m = root_exponents(rs, alpha)?;
        poly = divide_by_binomial(&poly, &m);
    }
    Ok(CharacterPolynomial { terms: poly })
}

/// Exact quotient `N / (1 − θ^m)`, assuming the division is exact.
fn divide_by_binomial(num: &BTreeMap<Vec<u32>, BigInt>, m: &[u32]) -> BTreeMap<Vec<u32>, BigInt> {
    let deg = |e: &[u32]| e.iter().map(|&x| x as u64).sum::<u64>();
    let dm = deg(m);
    let max_deg = num.keys().map(|e| deg(e)).max().unwrap_or(0);
    let mut work: BTreeSet<(u64, Vec<u32>)> = num.keys().map(|e| (deg(e), e.clone())).collect();
    let mut quot: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
    while let Some((d, e)) = work.pop_first() {
        let mut val = num.get(&e).cloned().unwrap_or_else(BigInt::zero);
        if e.iter().zip(m).all(|(a, b)| a >= b) {
            let prev: Vec<u32> = e.iter().zip(m).map(|(a, b)| a - b).collect();
            if let Some(q) = quot.get(&prev) {
                val += q;
            }
        }
        if !val.is_zero() {
            if d + dm <= max_deg {
                let next: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
                work.insert((d + dm, next));
            }
            quot.insert(e, val);
        }
    }
    quot
}
