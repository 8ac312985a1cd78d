//! Classical (and E6/E7) root systems realized in the standard basis
//! `ε₁..ε_D`, together with the Weyl group action on weights.
//!
//! Indices of simple roots and fundamental weights are 1-based throughout
//! the public API, matching the usual Bourbaki labelling.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::Q;

/// Default bound on the size of a single Weyl orbit.
pub const DEFAULT_ORBIT_CAP: usize = 1_000_000;
/// Default bound on the Weyl group order for full enumeration.
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;

const MAX_RANK: usize = 32;

/// A point of the weight lattice in `ε`-coordinates.
///
/// Coordinates are kept as reduced rationals so equality and hashing are by
/// exact value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Weight(Vec<Q>);

impl Weight {
    pub fn new(coords: Vec<Q>) -> Self {
        Weight(coords)
    }

    pub fn zero(dim: usize) -> Self {
        Weight(vec![Q::zero(); dim])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Weight(coords.iter().map(|&c| Q::from_integer(c)).collect())
    }

    /// Builds a weight from `(numerator, denominator)` pairs.
    pub fn from_fracs(coords: &[(i64, i64)]) -> Self {
        Weight(coords.iter().map(|&(n, d)| Q::new(n, d)).collect())
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &Weight) -> Q {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, k: Q) -> Weight {
        Weight(self.0.iter().map(|c| c * k).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(q_to_f64).collect()
    }
}

pub(crate) fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(self.0.iter().map(|a| -a).collect())
    }
}

/// Comma-separated reduced rationals, e.g. `1/2,1/2,-1/2`.
impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        crate::parse::parse_weight(s)
    }
}

/// Root system family label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::F => "F",
            Family::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            "E" | "e" => Ok(Family::E),
            "F" | "f" => Ok(Family::F),
            "G" | "g" => Ok(Family::G),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// A root system with its weight-lattice data.
///
/// Type A is realized with the `gl_{d+1}` lattice `Z^{d+1}`: fundamental
/// weights are `ε₁+…+εᵢ` and dominance means weakly decreasing coordinates.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    pub ambient_dim: usize,
    pub simple_roots: Vec<Weight>,
    pub positive_roots: Vec<Weight>,
    pub fundamental_weights: Vec<Weight>,
    /// `cartan_data[i][j] = 2⟨ωᵢ,αⱼ⟩/⟨αⱼ,αⱼ⟩`.
    pub cartan_data: Vec<Vec<Q>>,
    /// `2/⟨αⱼ,αⱼ⟩`, so that `⟨v,αⱼ∨⟩ = coroot_scale[j]·⟨v,αⱼ⟩`.
    coroot_scale: Vec<Q>,
    /// Cartan matrix `C[i][j] = ⟨αᵢ,αⱼ∨⟩`.
    cartan_inv: Vec<Vec<Q>>,
    /// Fundamental weights projected into the span of the simple roots.
    span_fundamentals: Vec<Weight>,
    rho: Weight,
    group_order: u128,
}

impl RootSystem {
    pub fn group_order(&self) -> u128 {
        self.group_order
    }

    pub(crate) fn rho(&self) -> &Weight {
        &self.rho
    }

    pub fn simple_root(&self, i: usize) -> &Weight {
        &self.simple_roots[i - 1]
    }

    pub fn fundamental_weight(&self, i: usize) -> &Weight {
        &self.fundamental_weights[i - 1]
    }

    fn check_dim(&self, v: &Weight) -> Result<()> {
        if v.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// `⟨v, αᵢ∨⟩` for the 1-based simple root index `i`.
    pub fn coroot_pairing(&self, v: &Weight, i: usize) -> Q {
        v.dot(&self.simple_roots[i - 1]) * self.coroot_scale[i - 1]
    }

    /// All coroot pairings of `v` (its Dynkin labels).
    pub fn labels(&self, v: &Weight) -> Vec<Q> {
        (1..=self.rank).map(|i| self.coroot_pairing(v, i)).collect()
    }

    /// Dynkin labels of a lattice weight as integers.
    pub fn integer_labels(&self, v: &Weight) -> Result<Vec<i64>> {
        self.check_dim(v)?;
        self.labels(v)
            .into_iter()
            .map(|q| {
                if q.is_integer() {
                    Ok(q.to_integer())
                } else {
                    Err(Error::NotInLattice(v.to_string()))
                }
            })
            .collect()
    }

    /// Component of `v` orthogonal to the span of the simple roots.
    pub fn complement(&self, v: &Weight) -> Weight {
        let labels = self.labels(v);
        let mut out = v.clone();
        for (l, w) in labels.iter().zip(&self.span_fundamentals) {
            out = &out - &w.scale(*l);
        }
        out
    }

    /// Reassembles a weight from its Dynkin labels and orthogonal complement.
    pub fn from_labels(&self, labels: &[i64], complement: &Weight) -> Weight {
        let mut out = complement.clone();
        for (&l, w) in labels.iter().zip(&self.span_fundamentals) {
            if l != 0 {
                out = &out + &w.scale(Q::from_integer(l));
            }
        }
        out
    }

    /// Dominance by coroot pairings: `⟨v,αᵢ∨⟩ ≥ 0` for every simple root.
    pub fn is_dominant(&self, v: &Weight) -> bool {
        (1..=self.rank).all(|i| !self.coroot_pairing(v, i).is_negative())
    }

    /// `sᵢ(v) = v − ⟨v,αᵢ∨⟩αᵢ`.
    pub fn simple_reflection(&self, i: usize, v: &Weight) -> Weight {
        let c = self.coroot_pairing(v, i);
        if c.is_zero() {
            return v.clone();
        }
        v - &self.simple_roots[i - 1].scale(c)
    }

    /// Breadth-first saturation of `{v}` under the simple reflections,
    /// returned in lexicographic order.
    pub fn weyl_orbit(&self, v: &Weight) -> Result<Vec<Weight>> {
        self.weyl_orbit_capped(v, DEFAULT_ORBIT_CAP)
    }

    pub fn weyl_orbit_capped(&self, v: &Weight, cap: usize) -> Result<Vec<Weight>> {
        self.check_dim(v)?;
        let mut seen: HashSet<Weight> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(v.clone());
        queue.push_back(v.clone());
        while let Some(u) = queue.pop_front() {
            for i in 1..=self.rank {
                let r = self.simple_reflection(i, &u);
                if !seen.contains(&r) {
                    if seen.len() >= cap {
                        return Err(Error::OrbitCapExceeded { cap });
                    }
                    seen.insert(r.clone());
                    queue.push_back(r);
                }
            }
        }
        let mut out: Vec<Weight> = seen.into_iter().collect();
        out.sort();
        Ok(out)
    }

    /// Orbit of a regular weight with the sign `(−1)^ℓ(w)` of the element
    /// reaching each point. BFS depth equals the length for regular weights.
    pub(crate) fn signed_orbit(&self, v: &Weight, cap: usize) -> Result<Vec<(Weight, i8)>> {
        let tree = self.orbit_tree(v, cap)?;
        Ok(tree.nodes.into_iter().map(|n| (n.point, n.sign)).collect())
    }

    fn orbit_tree(&self, v: &Weight, cap: usize) -> Result<OrbitTree> {
        let mut index: HashMap<Weight, usize> = HashMap::new();
        let mut nodes = vec![OrbitNode {
            point: v.clone(),
            parent: usize::MAX,
            generator: 0,
            sign: 1,
        }];
        index.insert(v.clone(), 0);
        let mut head = 0;
        while head < nodes.len() {
            let (u, sign) = (nodes[head].point.clone(), nodes[head].sign);
            for i in 1..=self.rank {
                let r = self.simple_reflection(i, &u);
                if !index.contains_key(&r) {
                    if nodes.len() >= cap {
                        return Err(Error::GroupCapExceeded { cap });
                    }
                    index.insert(r.clone(), nodes.len());
                    nodes.push(OrbitNode {
                        point: r,
                        parent: head,
                        generator: i,
                        sign: -sign,
                    });
                }
            }
            head += 1;
        }
        Ok(OrbitTree { nodes })
    }

    /// Every element of `W` exactly once, as an orthogonal map with its sign.
    pub fn enumerate_weyl(&self) -> Result<WeylElements<'_>> {
        self.enumerate_weyl_capped(DEFAULT_GROUP_CAP)
    }

    pub fn enumerate_weyl_capped(&self, cap: usize) -> Result<WeylElements<'_>> {
        if self.group_order > cap as u128 {
            return Err(Error::GroupCapExceeded { cap });
        }
        // ρ is regular, so W acts simply transitively on its orbit.
        let tree = self.orbit_tree(&self.rho, cap)?;
        Ok(WeylElements {
            rs: self,
            tree,
            next: 0,
        })
    }

    /// Coefficients `c` with `Σ cᵢαᵢ = v`.
    pub fn decompose_in_simple_roots(&self, v: &Weight) -> Result<Vec<Q>> {
        self.check_dim(v)?;
        let labels = self.labels(v);
        let coeffs: Vec<Q> = (0..self.rank)
            .map(|i| {
                (0..self.rank).fold(Q::zero(), |acc, j| acc + labels[j] * self.cartan_inv[j][i])
            })
            .collect();
        let mut recomposed = Weight::zero(self.ambient_dim);
        for (c, a) in coeffs.iter().zip(&self.simple_roots) {
            recomposed = &recomposed + &a.scale(*c);
        }
        if &recomposed != v {
            return Err(Error::NotInRootSpan(v.to_string()));
        }
        Ok(coeffs)
    }

    /// Integer simple-root coordinates from Dynkin labels of a root-lattice
    /// element (`labels · C⁻¹`). Caller guarantees integrality.
    pub(crate) fn root_coords_from_labels(&self, labels: &[i64]) -> Vec<i64> {
        (0..self.rank)
            .map(|i| {
                let c = (0..self.rank).fold(Q::zero(), |acc, j| {
                    acc + Q::from_integer(labels[j]) * self.cartan_inv[j][i]
                });
                debug_assert!(c.is_integer());
                c.to_integer()
            })
            .collect()
    }
}

struct OrbitNode {
    point: Weight,
    parent: usize,
    generator: usize,
    sign: i8,
}

struct OrbitTree {
    nodes: Vec<OrbitNode>,
}

/// A Weyl group element as a rational `D×D` matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    pub matrix: Vec<Vec<Q>>,
    pub sign: i8,
}

impl WeylElement {
    pub fn apply(&self, v: &Weight) -> Weight {
        Weight::new(
            self.matrix
                .iter()
                .map(|row| row.iter().zip(v.coords()).fold(Q::zero(), |a, (m, x)| a + m * x))
                .collect(),
        )
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(v).map(|(m, x)| q_to_f64(m) * x).sum())
            .collect()
    }
}

/// Stream of Weyl group elements in BFS (length) order.
pub struct WeylElements<'a> {
    rs: &'a RootSystem,
    tree: OrbitTree,
    next: usize,
}

impl WeylElements<'_> {
    pub fn len(&self) -> usize {
        self.tree.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.nodes.is_empty()
    }
}

impl Iterator for WeylElements<'_> {
    type Item = WeylElement;

    fn next(&mut self) -> Option<WeylElement> {
        let node = self.tree.nodes.get(self.next)?;
        let sign = node.sign;
        let mut word = Vec::new();
        let mut at = self.next;
        while at != 0 {
            word.push(self.tree.nodes[at].generator);
            at = self.tree.nodes[at].parent;
        }
        // w = s_{word[0]} ∘ … ∘ s_{word[last]}; apply innermost first.
        let dim = self.rs.ambient_dim;
        let columns: Vec<Weight> = (0..dim)
            .map(|j| {
                let mut e = Weight::zero(dim);
                e.0[j] = Q::one();
                for &g in word.iter().rev() {
                    e = self.rs.simple_reflection(g, &e);
                }
                e
            })
            .collect();
        let matrix = (0..dim)
            .map(|r| (0..dim).map(|c| columns[c].0[r]).collect())
            .collect();
        self.next += 1;
        Some(WeylElement { matrix, sign })
    }
}

fn unit(dim: usize, i: usize) -> Weight {
    let mut w = Weight::zero(dim);
    w.0[i] = Q::one();
    w
}

fn sum_units(dim: usize, range: std::ops::Range<usize>, scale: Q) -> Weight {
    let mut w = Weight::zero(dim);
    for i in range {
        w.0[i] = scale;
    }
    w
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn unsupported(family: Family, rank: usize, reason: &'static str) -> Error {
    Error::UnsupportedType {
        family: family.to_string(),
        rank,
        reason,
    }
}

pub(crate) fn invert(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..n {
                    let (x, y) = (a[col][j], inv[col][j]);
                    a[r][j] -= f * x;
                    inv[r][j] -= f * y;
                }
            }
        }
    }
    Some(inv)
}

/// Standard realization of a root system of the given type.
pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem> {
    if rank == 0 || rank > MAX_RANK {
        return Err(unsupported(family, rank, "rank out of range"));
    }
    let half = Q::new(1, 2);
    let (dim, simple_roots, explicit_fundamentals, group_order) = match family {
        Family::A => {
            let dim = rank + 1;
            let simple = (0..rank).map(|i| &unit(dim, i) - &unit(dim, i + 1)).collect();
            let fund = (1..=rank).map(|i| sum_units(dim, 0..i, Q::one())).collect();
            (dim, simple, Some(fund), factorial(rank + 1))
        }
        Family::B => {
            if rank < 2 {
                return Err(unsupported(family, rank, "B_d needs d >= 2"));
            }
            let dim = rank;
            let mut simple: Vec<Weight> =
                (0..rank - 1).map(|i| &unit(dim, i) - &unit(dim, i + 1)).collect();
            simple.push(unit(dim, rank - 1));
            (dim, simple, None, (1u128 << rank) * factorial(rank))
        }
        Family::C => {
            if rank < 2 {
                return Err(unsupported(family, rank, "C_d needs d >= 2"));
            }
            let dim = rank;
            let mut simple: Vec<Weight> =
                (0..rank - 1).map(|i| &unit(dim, i) - &unit(dim, i + 1)).collect();
            simple.push(unit(dim, rank - 1).scale(Q::from_integer(2)));
            (dim, simple, None, (1u128 << rank) * factorial(rank))
        }
        Family::D => {
            if rank < 3 {
                return Err(unsupported(family, rank, "D_d needs d >= 3"));
            }
            let dim = rank;
            let mut simple: Vec<Weight> =
                (0..rank - 1).map(|i| &unit(dim, i) - &unit(dim, i + 1)).collect();
            simple.push(&unit(dim, rank - 2) + &unit(dim, rank - 1));
            (dim, simple, None, (1u128 << (rank - 1)) * factorial(rank))
        }
        Family::E => {
            let order = match rank {
                6 => 51_840,
                7 => 2_903_040,
                8 => return Err(unsupported(family, rank, "E8 has no minuscule weight")),
                _ => return Err(unsupported(family, rank, "E_d needs d in {6,7}")),
            };
            let dim = 8;
            let mut alpha1 = sum_units(dim, 1..7, -half);
            alpha1.0[0] = half;
            alpha1.0[7] = half;
            let mut simple = vec![alpha1, &unit(dim, 0) + &unit(dim, 1)];
            for i in 0..rank - 2 {
                simple.push(&unit(dim, i + 1) - &unit(dim, i));
            }
            (dim, simple, None, order)
        }
        Family::F | Family::G => {
            return Err(unsupported(family, rank, "F4 and G2 have no minuscule weight"))
        }
    };

    let norms: Vec<Q> = simple_roots.iter().map(|a: &Weight| a.dot(a)).collect();
    let coroot_scale: Vec<Q> = norms.iter().map(|n| Q::from_integer(2) / n).collect();
    let cartan: Vec<Vec<Q>> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| simple_roots[i].dot(&simple_roots[j]) * coroot_scale[j])
                .collect()
        })
        .collect();
    let cartan_inv = invert(&cartan).expect("Cartan matrix is invertible");
    let span_fundamentals: Vec<Weight> = (0..rank)
        .map(|i| {
            let mut w = Weight::zero(dim);
            for k in 0..rank {
                w = &w + &simple_roots[k].scale(cartan_inv[i][k]);
            }
            w
        })
        .collect();
    let fundamental_weights = explicit_fundamentals.unwrap_or_else(|| span_fundamentals.clone());

    let mut rs = RootSystem {
        family,
        rank,
        ambient_dim: dim,
        simple_roots,
        positive_roots: Vec::new(),
        fundamental_weights,
        cartan_data: Vec::new(),
        coroot_scale,
        cartan_inv,
        span_fundamentals,
        rho: Weight::zero(dim),
        group_order,
    };
    rs.cartan_data = (0..rank)
        .map(|i| {
            (1..=rank)
                .map(|j| rs.coroot_pairing(&rs.fundamental_weights[i], j))
                .collect()
        })
        .collect();

    let mut roots: HashSet<Weight> = HashSet::new();
    for a in &rs.simple_roots {
        roots.extend(rs.weyl_orbit(a)?);
    }
    let mut positive: Vec<Weight> = roots
        .into_iter()
        .filter(|r| {
            rs.decompose_in_simple_roots(r)
                .map(|c| c.iter().all(|x| !x.is_negative()))
                .unwrap_or(false)
        })
        .collect();
    positive.sort();
    let expected = match family {
        Family::A => rank * (rank + 1) / 2,
        Family::B | Family::C => rank * rank,
        Family::D => rank * (rank - 1),
        Family::E if rank == 6 => 36,
        _ => 63,
    };
    assert_eq!(positive.len(), expected, "positive root count for {family}{rank}");
    let mut rho = Weight::zero(dim);
    for r in &positive {
        rho = &rho + r;
    }
    rs.rho = rho.scale(half);
    rs.positive_roots = positive;
    Ok(rs)
}
