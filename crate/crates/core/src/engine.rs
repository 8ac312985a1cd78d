//! Layered dynamic programme over dominant weights.
//!
//! States are Dynkin-label vectors packed into a `u128`, one lane per label,
//! and each layer is a sorted key vector with its values alongside.

use num::{BigUint, One, Zero};

use crate::error::{Error, Result};
use crate::reps::MinusculeRep;

pub(crate) trait Cell: Clone + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add_weighted(&mut self, from: &Self, weight: f64);
}

/// Unweighted path counts.
impl Cell for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add_weighted(&mut self, from: &Self, _weight: f64) {
        *self += from;
    }
}

/// Probability mass.
impl Cell for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add_weighted(&mut self, from: &Self, weight: f64) {
        *self += weight * from;
    }
}

#[derive(Clone, Debug)]
struct Packing {
    width: u32,
    mask: u128,
    rank: usize,
}

impl Packing {
    fn new(rank: usize) -> Self {
        let width = (128 / rank as u32).min(32);
        Packing {
            width,
            mask: (1u128 << width) - 1,
            rank,
        }
    }

    fn pack(&self, labels: &[i64]) -> Option<u128> {
        let mut key = 0u128;
        for (i, &l) in labels.iter().enumerate() {
            if l < 0 || l as u128 > self.mask {
                return None;
            }
            key |= (l as u128) << (i as u32 * self.width);
        }
        Some(key)
    }

    fn lane(&self, key: u128, i: usize) -> u128 {
        (key >> (i as u32 * self.width)) & self.mask
    }

    fn unpack(&self, key: u128) -> Vec<i64> {
        (0..self.rank).map(|i| self.lane(key, i) as i64).collect()
    }
}

#[derive(Clone, Debug)]
struct PackedStep {
    add: u128,
    sub: u128,
    inc: Vec<usize>,
    dec: Vec<usize>,
}

enum Move {
    To(u128),
    Blocked,
    Overflow,
}

impl PackedStep {
    fn new(p: &Packing, delta: &[i64]) -> Self {
        let mut step = PackedStep {
            add: 0,
            sub: 0,
            inc: Vec::new(),
            dec: Vec::new(),
        };
        for (i, &l) in delta.iter().enumerate() {
            let unit = 1u128 << (i as u32 * p.width);
            match l {
                1 => {
                    step.add |= unit;
                    step.inc.push(i);
                }
                -1 => {
                    step.sub |= unit;
                    step.dec.push(i);
                }
                _ => debug_assert_eq!(l, 0),
            }
        }
        step
    }

    fn forward(&self, p: &Packing, key: u128) -> Move {
        if self.dec.iter().any(|&i| p.lane(key, i) == 0) {
            return Move::Blocked;
        }
        if self.inc.iter().any(|&i| p.lane(key, i) == p.mask) {
            return Move::Overflow;
        }
        Move::To(key + self.add - self.sub)
    }

}

/// One DP layer: `vals[j * m + t]` belongs to state `keys[j]` and start `t`.
pub(crate) struct Layer<V> {
    /// Sorted ascending.
    pub keys: Vec<u128>,
    pub vals: Vec<V>,
    pub m: usize,
}

impl<V> Layer<V> {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn find(&self, key: u128) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }

    pub fn row(&self, j: usize) -> &[V] {
        &self.vals[j * self.m..(j + 1) * self.m]
    }
}

pub(crate) struct Dp {
    packing: Packing,
    steps: Vec<PackedStep>,
    weights: Vec<f64>,
    cap: usize,
}

impl Dp {
    /// `weights` are the per-step factors used by float cells.
    pub fn new(rep: &MinusculeRep, weights: Vec<f64>, cap: usize) -> Self {
        let packing = Packing::new(rep.root_system().rank);
        let steps = rep
            .step_labels()
            .iter()
            .map(|d| PackedStep::new(&packing, d))
            .collect();
        Dp {
            packing,
            steps,
            weights,
            cap,
        }
    }

    pub fn pack(&self, labels: &[i64]) -> Option<u128> {
        self.packing.pack(labels)
    }

    pub fn unpack(&self, key: u128) -> Vec<i64> {
        self.packing.unpack(key)
    }

    /// Runs `n` steps from the given dominant label vectors, calling `visit`
    /// on every layer `0..=n`, and returns the last layer.
    pub fn run<V: Cell>(
        &self,
        starts: &[Vec<i64>],
        n: usize,
        mut visit: impl FnMut(usize, &Layer<V>) -> Result<()>,
    ) -> Result<Layer<V>> {
        let m = starts.len();
        let mut keys = starts
            .iter()
            .map(|s| self.packing.pack(s).ok_or(Error::KeyOverflow { layer: 0 }))
            .collect::<Result<Vec<u128>>>()?;
        keys.sort_unstable();
        keys.dedup();
        let mut vals = vec![V::zero(); keys.len() * m];
        for (t, s) in starts.iter().enumerate() {
            let j = keys.binary_search(&self.packing.pack(s).unwrap()).unwrap();
            vals[j * m + t] = V::one();
        }
        let mut layer = Layer { keys, vals, m };
        visit(0, &layer)?;
        for k in 1..=n {
            layer = self.advance(&layer, k)?;
            visit(k, &layer)?;
        }
        Ok(layer)
    }

    /// Adding a step to a packed key is monotone in the key, so each step maps
    /// the sorted previous layer to a sorted list. The next layer is the merge
    /// of those lists, and every cell accumulates its predecessors in step
    /// order during the merge.
    fn advance<V: Cell>(&self, prev: &Layer<V>, k: usize) -> Result<Layer<V>> {
        let m = prev.m;
        let ns = self.steps.len();
        let next_valid = |s: usize, from: usize| -> Result<(usize, Option<u128>)> {
            let mut j = from;
            while j < prev.len() {
                match self.steps[s].forward(&self.packing, prev.keys[j]) {
                    Move::To(key) => return Ok((j, Some(key))),
                    Move::Blocked => j += 1,
                    Move::Overflow => return Err(Error::KeyOverflow { layer: k }),
                }
            }
            Ok((j, None))
        };
        let mut cursor = vec![0usize; ns];
        let mut head = vec![None; ns];
        for s in 0..ns {
            (cursor[s], head[s]) = next_valid(s, 0)?;
        }
        let mut keys = Vec::with_capacity(prev.len() + prev.len() / 2);
        let mut vals: Vec<V> = Vec::with_capacity(keys.capacity() * m);
        while let Some(min) = head.iter().flatten().min().copied() {
            if keys.len() == self.cap {
                return Err(Error::StateCapExceeded {
                    layer: k,
                    cap: self.cap,
                });
            }
            keys.push(min);
            let base = vals.len();
            vals.extend(std::iter::repeat_with(V::zero).take(m));
            for s in 0..ns {
                if head[s] == Some(min) {
                    let j = cursor[s];
                    for (c, v) in vals[base..].iter_mut().zip(prev.row(j)) {
                        c.add_weighted(v, self.weights[s]);
                    }
                    (cursor[s], head[s]) = next_valid(s, j + 1)?;
                }
            }
        }
        Ok(Layer { keys, vals, m })
    }
}
