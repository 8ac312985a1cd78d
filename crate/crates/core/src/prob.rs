//! Probabilities that are either exact rationals or floats, and sparse
//! transition rows built from them.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::lattice::Weight;
use crate::parse::format_rational;

/// A probability (or positive weight), exact when possible.
#[derive(Clone, Debug, PartialEq)]
pub enum Prob {
    Exact(BigRational),
    Float(f64),
}

impl Prob {
    pub fn one() -> Self {
        Prob::Exact(BigRational::one())
    }

    pub fn zero() -> Self {
        Prob::Exact(BigRational::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Prob::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(q) => rational_to_f64(q),
            Prob::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Prob::Exact(q) => Some(q),
            Prob::Float(_) => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Prob::Exact(q) => q.is_positive(),
            Prob::Float(x) => *x > 0.0,
        }
    }

    pub fn add(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a + b),
            _ => Prob::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a * b),
            _ => Prob::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// Division; callers guarantee a nonzero divisor.
    pub fn div(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a / b),
            _ => Prob::Float(self.to_f64() / other.to_f64()),
        }
    }

    /// `num/den` for exact values, empty for floats.
    pub fn exact_string(&self) -> String {
        match self {
            Prob::Exact(q) => format_rational(q),
            Prob::Float(_) => String::new(),
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(q) => f.write_str(&format_rational(q)),
            Prob::Float(x) => write!(f, "{x:e}"),
        }
    }
}

/// Converts a big rational to the nearest-ish `f64` without overflowing on
/// huge numerators and denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    // Keep ~60 significant bits of each side before converting.
    let ns = (nb - 60).max(0);
    let ds = (db - 60).max(0);
    let n = (q.numer().abs() >> ns as usize).to_f64().unwrap_or(f64::MAX);
    let d = (q.denom() >> ds as usize).to_f64().unwrap_or(f64::MAX);
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * (n / d) * 2f64.powi((ns - ds) as i32)
}

/// A sparse transition row from `source` over weights.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelRow {
    pub source: Weight,
    pub entries: Vec<(Weight, Prob)>,
}

impl KernelRow {
    pub fn new(source: Weight, entries: Vec<(Weight, Prob)>) -> Self {
        KernelRow { source, entries }
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|(_, p)| p.is_exact())
    }

    /// Sum of the entries, exact when every entry is.
    pub fn total(&self) -> Prob {
        self.entries
            .iter()
            .fold(Prob::zero(), |acc, (_, p)| acc.add(p))
    }

    pub fn probability(&self, target: &Weight) -> Option<&Prob> {
        self.entries
            .iter()
            .find(|(w, _)| w == target)
            .map(|(_, p)| p)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Weight> {
        self.entries.iter().map(|(w, _)| w)
    }

    /// Total-variation distance `½ Σ |p − q|` over the union of supports.
    pub fn tv_distance(&self, other: &KernelRow) -> f64 {
        let mut diff: BTreeMap<&Weight, f64> = BTreeMap::new();
        for (w, p) in &self.entries {
            *diff.entry(w).or_default() += p.to_f64();
        }
        for (w, p) in &other.entries {
            *diff.entry(w).or_default() -= p.to_f64();
        }
        0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
    }

    /// Entries converted to floats, in row order.
    pub fn to_f64(&self) -> Vec<(Weight, f64)> {
        self.entries
            .iter()
            .map(|(w, p)| (w.clone(), p.to_f64()))
            .collect()
    }
}
