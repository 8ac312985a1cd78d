use std::collections::BTreeMap;

use num::{BigRational, BigUint, One, Zero};
use weylwalk::conditioning::{count_paths, finite_horizon_row, psi_series, reachable_layers, survival_with, Precision, SurvivalOptions};
use weylwalk::reps::{build_minuscule, dim_irrep};
use weylwalk::walk::{step_distribution, Theta};
use weylwalk::{build_root_system, Family, MinusculeRep, Prob, Weight};

fn rep(f: Family, r: usize, i: usize) -> MinusculeRep {
    build_minuscule(&build_root_system(f, r).unwrap(), i).unwrap()
}

/// Brute force over every step sequence: surviving endpoints and probability.
fn enumerate(rep: &MinusculeRep, probs: &[BigRational], start: &Weight, n: usize) -> (BTreeMap<Weight, BigUint>, BigRational) {
    let rs = rep.root_system();
    let mut counts = BTreeMap::new();
    let mut psi = BigRational::zero();
    let total = rep.dim().pow(n as u32);
    for mut code in 0..total {
        let mut w = start.clone();
        let mut p = BigRational::one();
        let mut ok = true;
        for _ in 0..n {
            let s = code % rep.dim();
            code /= rep.dim();
            w = &w + &rep.steps[s];
            p *= &probs[s];
            ok &= rs.is_dominant(&w);
        }
        if ok {
            *counts.entry(w).or_insert_with(BigUint::zero) += 1u32;
            psi += p;
        }
    }
    (counts, psi)
}

#[test]
fn dp_matches_enumeration() {
    for rep in [rep(Family::A, 2, 1), rep(Family::B, 2, 2), rep(Family::C, 2, 1), rep(Family::D, 3, 2)] {
        let theta = Theta::from_fracs(&vec![(2, 3); rep.root_system().rank]).unwrap();
        let sd = step_distribution(&rep, &theta).unwrap();
        let start = rep.delta.clone();
        let opts = SurvivalOptions { precision: Precision::Exact, keep_layers: true, ..Default::default() };
        let table = survival_with(&rep, &theta, &start, 5, opts).unwrap();
        for n in 0..=5 {
            let (counts, psi) = enumerate(&rep, &sd.probs, &start, n);
            assert_eq!(table.psi[n], Prob::Exact(psi));
            let layer: BTreeMap<_, _> = table.layers.as_ref().unwrap()[n].iter().cloned().collect();
            assert_eq!(layer, counts);
            for (w, c) in &counts {
                assert_eq!(&count_paths(&rep, &start, w, n).unwrap(), c);
            }
        }
    }
}

#[test]
fn path_probability_depends_on_endpoints_only() {
    // every surviving path to Λ has probability x^{Λ−λ}/s_δ(x)^n, so the
    // mass at Λ is count·Π p_s^{c_s} for any decomposition of Λ−λ
    let rep = rep(Family::B, 3, 3);
    let theta = Theta::from_fracs(&[(1, 2), (1, 3), (1, 5)]).unwrap();
    let sd = step_distribution(&rep, &theta).unwrap();
    let zero = Weight::zero(3);
    for n in 1..=5 {
        let (counts, psi) = enumerate(&rep, &sd.probs, &zero, n);
        let mut mass = BigRational::zero();
        for (w, c) in counts {
            // walk greedily from 0 to w through steps, one path suffices
            let mut p = BigRational::one();
            let mut at = zero.clone();
            for k in 0..n {
                let (s, next) = rep
                    .steps
                    .iter()
                    .enumerate()
                    .map(|(s, st)| (s, &at + st))
                    .find(|(_, nx)| count_paths(&rep, nx, &w, n - k - 1).map(|c| !c.is_zero()).unwrap_or(false) && rep.root_system().is_dominant(nx))
                    .unwrap();
                p *= &sd.probs[s];
                at = next;
            }
            mass += p * BigRational::from_integer(c.into());
        }
        assert_eq!(mass, psi);
    }
}

#[test]
fn survival_is_monotone_and_tensor_powers_decompose() {
    let rep = rep(Family::B, 3, 3);
    let rs = rep.root_system();
    let zero = Weight::zero(3);
    let psi = &psi_series(&rep, &Theta::ones(3), &[zero.clone()], 40, Precision::Exact).unwrap()[0];
    assert!(psi.windows(2).all(|w| w[1].to_f64() <= w[0].to_f64()));
    let opts = SurvivalOptions { precision: Precision::Exact, keep_layers: true, ..Default::default() };
    let table = survival_with(&rep, &Theta::ones(3), &zero, 6, opts).unwrap();
    for (n, layer) in table.layers.unwrap().iter().enumerate() {
        let mass: num::BigInt = layer.iter().map(|(w, c)| dim_irrep(rs, w).unwrap() * num::BigInt::from(c.clone())).sum();
        // V(δ)^{⊗n} = ⊕ f^n_Λ V(Λ) for minuscule δ
        assert_eq!(mass, num::BigInt::from(8u32).pow(n as u32), "n = {n}");
    }
}

#[test]
fn psi_satisfies_the_layer_recursion() {
    let rep = rep(Family::A, 2, 1);
    let theta = Theta::from_fracs(&[(1, 2), (2, 3)]).unwrap();
    let sd = step_distribution(&rep, &theta).unwrap();
    let lams = reachable_layers(&rep, 3).unwrap().concat();
    let n = 8;
    let series = psi_series(&rep, &theta, &lams, n, Precision::Exact).unwrap();
    for (lam, psi) in lams.iter().zip(&series) {
        let succ: Vec<Weight> = weylwalk::reps::successors(&rep, lam).unwrap();
        let next = psi_series(&rep, &theta, &succ, n - 1, Precision::Exact).unwrap();
        let rhs = succ.iter().zip(&next).fold(Prob::zero(), |a, (t, s)| {
            a.add(&Prob::Exact(sd.prob(&(t - lam)).unwrap().clone()).mul(&s[n - 1]))
        });
        assert_eq!(psi[n], rhs);
    }
}

#[test]
fn finite_rows_are_stochastic() {
    let rep = rep(Family::D, 4, 1);
    let row = finite_horizon_row(&rep, &Theta::ones(4), &rep.delta, 12).unwrap();
    assert_eq!(row.total(), Prob::one());
}
