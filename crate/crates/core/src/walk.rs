//! θ-parameterized step laws and the infinite-horizon conditioned kernels.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{RootSystem, Weight};
use crate::parse::{format_rational, parse_theta};
use crate::prob::{rational_to_f64, KernelRow, Prob};
use crate::reps::{dim_irrep, normalized_character, q_to_big, successors, MinusculeRep};

/// The parameter `θ ∈ (0,∞)^d`, one positive rational per simple root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Theta(Vec<BigRational>);

impl Theta {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if values.iter().any(|t| !t.is_positive()) {
            return Err(Error::NonPositiveTheta);
        }
        Ok(Theta(values))
    }

    pub fn ones(d: usize) -> Self {
        Theta(vec![BigRational::one(); d])
    }

    /// From `(numerator, denominator)` pairs.
    pub fn from_fracs(values: &[(i64, i64)]) -> Result<Self> {
        Theta::new(
            values
                .iter()
                .map(|&(n, d)| BigRational::new(n.into(), d.into()))
                .collect(),
        )
    }

    /// `θᵢ = 1 − (1 − θ₀)·2^{−k}` in every coordinate.
    pub fn toward_one(d: usize, theta0: &BigRational, k: u32) -> Result<Self> {
        let gap = (BigRational::one() - theta0) / BigRational::from_integer(BigInt::one() << k);
        Theta::new(vec![BigRational::one() - gap; d])
    }

    pub fn values(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|t| t.is_one())
    }

    /// Every coordinate in `(0,1)`: the drift lies in the open chamber.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|t| *t < BigRational::one())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    fn check_len(&self, d: usize) -> Result<()> {
        if self.0.len() != d {
            return Err(Error::ThetaLength {
                expected: d,
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Theta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theta::new(parse_theta(s)?)
    }
}

/// `θ^m = Π θᵢ^{mᵢ}`.
pub fn theta_power(theta: &Theta, m: &[u32]) -> BigRational {
    theta
        .values()
        .iter()
        .zip(m)
        .fold(BigRational::one(), |acc, (t, &k)| acc * num::pow(t.clone(), k as usize))
}

/// Step law `p_s = θ^{[s]}/Σ` on `P(δ)` with its drift and a solved `x`.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    pub rep: MinusculeRep,
    pub theta: Theta,
    /// `θ^{[s]}` in step order.
    pub monomials: Vec<BigRational>,
    pub sigma: BigRational,
    pub probs: Vec<BigRational>,
    pub x: Vec<f64>,
    /// `Σ p_s s` in ε-coordinates.
    pub drift: Vec<BigRational>,
}

impl StepDistribution {
    pub fn steps(&self) -> &[Weight] {
        &self.rep.steps
    }

    pub fn prob(&self, step: &Weight) -> Option<&BigRational> {
        self.rep.step_index.get(step).map(|&i| &self.probs[i])
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational_to_f64).collect()
    }

    /// Drift coordinates on the fundamental weights, `⟨d, αᵢ∨⟩`.
    pub fn drift_omega(&self) -> Vec<BigRational> {
        drift_omega(self.rep.root_system(), &self.drift)
    }
}

pub fn step_distribution(rep: &MinusculeRep, theta: &Theta) -> Result<StepDistribution> {
    let rs = rep.root_system();
    theta.check_len(rs.rank)?;
    let monomials: Vec<BigRational> = rep
        .step_exponents()
        .iter()
        .map(|m| theta_power(theta, m))
        .collect();
    let sigma: BigRational = monomials.iter().sum();
    let probs: Vec<BigRational> = monomials.iter().map(|w| w / &sigma).collect();
    let mut drift = vec![BigRational::zero(); rs.ambient_dim];
    for (p, s) in probs.iter().zip(&rep.steps) {
        for (d, c) in drift.iter_mut().zip(s.coords()) {
            *d += p * q_to_big(*c);
        }
    }
    let x = solve_x(rs, theta)?;
    Ok(StepDistribution {
        rep: rep.clone(),
        theta: theta.clone(),
        monomials,
        sigma,
        probs,
        x,
        drift,
    })
}

/// Exact drift `Σ p_s s`.
pub fn drift(sd: &StepDistribution) -> &[BigRational] {
    &sd.drift
}

fn drift_omega(rs: &RootSystem, v: &[BigRational]) -> Vec<BigRational> {
    (1..=rs.rank)
        .map(|i| {
            let alpha = rs.simple_root(i);
            let dot: BigRational = v
                .iter()
                .zip(alpha.coords())
                .map(|(a, b)| a * q_to_big(*b))
                .sum();
            dot * BigRational::from_integer(2.into()) / q_to_big(alpha.dot(alpha))
        })
        .collect()
}

/// Minimum-norm solution of `x^{αᵢ} = θᵢ^{−1}`: `log x = Σ cₖαₖ` with
/// `Gram · c = −log θ`.
pub fn solve_x(rs: &RootSystem, theta: &Theta) -> Result<Vec<f64>> {
    theta.check_len(rs.rank)?;
    let d = rs.rank;
    let rhs: Vec<f64> = theta.to_f64().iter().map(|t| -t.ln()).collect();
    let alphas: Vec<Vec<f64>> = rs.simple_roots.iter().map(|a| a.to_f64()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut a: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row: Vec<f64> = (0..d).map(|j| dot(&alphas[i], &alphas[j])).collect();
            row.push(rhs[i]);
            row
        })
        .collect();
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::SolveFailed("singular Gram matrix".into()));
        }
        a.swap(col, piv);
        for r in 0..d {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=d {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coeffs: Vec<f64> = (0..d).map(|i| a[i][d] / a[i][i]).collect();
    let log_x: Vec<f64> = (0..rs.ambient_dim)
        .map(|k| coeffs.iter().zip(&alphas).map(|(c, al)| c * al[k]).sum())
        .collect();
    for (i, alpha) in alphas.iter().enumerate() {
        let resid = dot(&log_x, alpha) - rhs[i];
        if resid.abs() > 1e-12 * rhs[i].abs().max(1.0) {
            return Err(Error::SolveFailed(format!("residual {resid:e} on α{}", i + 1)));
        }
    }
    Ok(log_x.iter().map(|l| l.exp()).collect())
}

fn require_interior(theta: &Theta) -> Result<()> {
    if !theta.is_interior() {
        return Err(Error::DriftNotInterior);
    }
    Ok(())
}

/// `Π_{α>0} (1 − θ^{c(α)})`, the conditioned survival probability from 0.
fn root_product(rs: &RootSystem, theta: &Theta) -> Result<BigRational> {
    let mut out = BigRational::one();
    for alpha in &rs.positive_roots {
        let m: Vec<u32> = rs
            .decompose_in_simple_roots(alpha)?
            .iter()
            .map(|c| c.to_integer() as u32)
            .collect();
        out *= BigRational::one() - theta_power(theta, &m);
    }
    Ok(out)
}

/// `h(λ) = x^{−λ}s_λ(x)Π_{α>0}(1 − x^{−α})`, exact in `θ`.
pub fn h_drifted_exact(rep: &MinusculeRep, theta: &Theta, lam: &Weight) -> Result<BigRational> {
    let rs = rep.root_system();
    theta.check_len(rs.rank)?;
    require_interior(theta)?;
    let p = normalized_character(rs, lam)?;
    Ok(p.eval(theta.values()) * root_product(rs, theta)?)
}

pub fn h_drifted(rep: &MinusculeRep, theta: &Theta, lam: &Weight) -> Result<f64> {
    h_drifted_exact(rep, theta, lam).map(|h| rational_to_f64(&h))
}

/// `p⁺(λ,Λ) = s_Λ(x)/(s_δ(x)s_λ(x))` on `λ ⇝ Λ`.
///
/// Computed as `p_{Λ−λ}·P_Λ(θ)/P_λ(θ)` with `P_μ = x^{−μ}s_μ(x)` expanded as
/// a polynomial in `θ`, so the row is an exact rational.
pub fn kernel_drifted(rep: &MinusculeRep, theta: &Theta, lam: &Weight) -> Result<KernelRow> {
    require_interior(theta)?;
    conditioned_character_row(rep, theta, lam)
}

/// The character-ratio row without the interior check. On the boundary of
/// the chamber this is the conjectured limit of the finite-horizon rows.
pub fn conditioned_character_row(
    rep: &MinusculeRep,
    theta: &Theta,
    lam: &Weight,
) -> Result<KernelRow> {
    let rs = rep.root_system();
    let sd = step_distribution(rep, theta)?;
    let base = normalized_character(rs, lam)?.eval(theta.values());
    let mut entries = Vec::new();
    for target in successors(rep, lam)? {
        let p = sd.prob(&(&target - lam)).expect("successor differs by a step");
        let ratio = normalized_character(rs, &target)?.eval(theta.values()) / &base;
        entries.push((target, Prob::Exact(p * ratio)));
    }
    Ok(KernelRow::new(lam.clone(), entries))
}

/// `p⁺(λ,Λ) = dim V(Λ)/(dim V(δ) dim V(λ))`.
pub fn kernel_zero_drift(rep: &MinusculeRep, lam: &Weight) -> Result<KernelRow> {
    let rs = rep.root_system();
    let scale = dim_irrep(rs, lam)? * BigInt::from(rep.dim());
    let entries = successors(rep, lam)?
        .into_iter()
        .map(|t| {
            let d = dim_irrep(rs, &t)?;
            Ok((t, Prob::Exact(BigRational::new(d, scale.clone()))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelRow::new(lam.clone(), entries))
}

/// One-step law of the unconditioned walk from `λ`, over all of `λ + P(δ)`.
pub fn unconditioned_row(sd: &StepDistribution, lam: &Weight) -> KernelRow {
    let entries = sd
        .rep
        .steps
        .iter()
        .zip(&sd.probs)
        .map(|(s, p)| (lam + s, Prob::Exact(p.clone())))
        .collect();
    KernelRow::new(lam.clone(), entries)
}

/// The unconditioned row restricted to dominant targets (substochastic).
pub fn restricted_row(sd: &StepDistribution, lam: &Weight) -> Result<KernelRow> {
    let rs = sd.rep.root_system();
    let mut entries: Vec<(Weight, Prob)> = successors(&sd.rep, lam)?
        .into_iter()
        .map(|t| {
            let p = sd.prob(&(&t - lam)).expect("successor differs by a step").clone();
            (t, Prob::Exact(p))
        })
        .collect();
    entries.retain(|(t, _)| rs.is_dominant(t));
    Ok(KernelRow::new(lam.clone(), entries))
}

/// `p(λ,Λ) h(Λ)/h(λ)`.
pub fn doob_transform(row: &KernelRow, h: impl Fn(&Weight) -> Prob) -> Result<KernelRow> {
    let hs = h(&row.source);
    if !hs.is_positive() {
        return Err(Error::NonPositiveH(row.source.to_string()));
    }
    let entries = row
        .entries
        .iter()
        .map(|(t, p)| {
            let ht = h(t);
            if !ht.is_positive() {
                return Err(Error::NonPositiveH(t.to_string()));
            }
            Ok((t.clone(), p.mul(&ht).div(&hs)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelRow::new(row.source.clone(), entries))
}
