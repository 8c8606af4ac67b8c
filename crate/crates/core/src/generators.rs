//! Comparison rules: Halton prefixes, Fibonacci lattices, Smolyak sparse
//! grids, equispaced rules, and reproducible random shifts.
//!
//! Every rule keeps exact rational coordinates and weights so the
//! worst-case-error oracle can run without rounding; floating-point views
//! are derived on demand.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::f2::PointSet;
use crate::util::mix64;

pub type Coord = Ratio<u128>;
pub type Weight = Ratio<i128>;

/// A cubature rule Σ λ_i f(x^i) on [0,1)^d with exact rational nodes and
/// weights. Weights always sum to exactly 1; QMC rules use equal weights,
/// sparse grids carry signed ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubatureRule {
    coords: Vec<Coord>,
    weights: Vec<Weight>,
    dim: usize,
}

impl CubatureRule {
    /// `coords` is row-major, one row of `dim` rationals per point.
    pub fn new(coords: Vec<Coord>, weights: Vec<Weight>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("rule dimension must be at least 1"));
        }
        if weights.is_empty() {
            return Err(Error::domain("rule needs at least one point"));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::domain(format!(
                "{} coordinates do not match {} points of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| **c >= Coord::one()) {
            return Err(Error::domain(format!("coordinate {c} outside [0,1)")));
        }
        let total: Weight = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(CubatureRule { coords, weights, dim })
    }

    /// Equal weights 1/N over the given nodes.
    pub fn equal_weight(coords: Vec<Coord>, dim: usize) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::domain("coordinate array does not tile the dimension"));
        }
        let n = coords.len() / dim;
        let w = Weight::new(1, n as i128);
        CubatureRule::new(coords, vec![w; n], dim)
    }

    /// Equal-weight rule over a dyadic point set.
    pub fn from_point_set(ps: &PointSet) -> Result<Self> {
        let denom = 1u128 << ps.precision();
        let mut coords = Vec::with_capacity(ps.len() * ps.dimension());
        for i in 0..ps.len() {
            coords.extend(ps.point(i).iter().map(|&v| Coord::new(v as u128, denom)));
        }
        CubatureRule::equal_weight(coords, ps.dimension())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn coord(&self, i: usize, j: usize) -> &Coord {
        &self.coords[i * self.dim + j]
    }

    pub fn point(&self, i: usize) -> &[Coord] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> &Weight {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn is_equal_weight(&self) -> bool {
        let w = Weight::new(1, self.len() as i128);
        self.weights.iter().all(|v| *v == w)
    }

    /// Row-major f64 coordinates, one row per point.
    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64().unwrap()).collect()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.to_f64().unwrap()).collect()
    }
}

/// Radical inverse of i in the given pairwise-coprime bases; exact rationals
/// with denominators b^k.
pub fn halton_point(i: u64, bases: &[u32]) -> Result<Vec<Coord>> {
    check_bases(bases)?;
    Ok(bases.iter().map(|&b| radical_inverse(i, u128::from(b))).collect())
}

/// The first `count` Halton points as an equal-weight rule.
pub fn halton_rule(count: usize, bases: &[u32]) -> Result<CubatureRule> {
    check_bases(bases)?;
    if count == 0 {
        return Err(Error::domain("rule needs at least one point"));
    }
    let mut coords = Vec::with_capacity(count * bases.len());
    for i in 0..count as u64 {
        coords.extend(bases.iter().map(|&b| radical_inverse(i, u128::from(b))));
    }
    CubatureRule::equal_weight(coords, bases.len())
}

/// The first d primes, the conventional Halton bases.
pub fn standard_bases(d: usize) -> Vec<u32> {
    let mut primes = Vec::with_capacity(d);
    let mut c = 2u32;
    while primes.len() < d {
        if (2..c).take_while(|p| p * p <= c).all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn check_bases(bases: &[u32]) -> Result<()> {
    if bases.is_empty() {
        return Err(Error::domain("need at least one base"));
    }
    if let Some(&b) = bases.iter().find(|&&b| b < 2) {
        return Err(Error::domain(format!("base {b} must be at least 2")));
    }
    for (k, &a) in bases.iter().enumerate() {
        for &b in &bases[k + 1..] {
            if a.gcd(&b) != 1 {
                return Err(Error::domain(format!("bases {a} and {b} are not coprime")));
            }
        }
    }
    Ok(())
}

fn radical_inverse(mut i: u64, base: u128) -> Coord {
    let mut num = 0u128;
    let mut den = 1u128;
    while i > 0 {
        num = num * base + u128::from(i) % base;
        den *= base;
        i /= u64::try_from(base).unwrap();
    }
    Coord::new(num, den)
}

/// Fibonacci numbers with F₁ = F₂ = 1.
pub fn fibonacci(m: u32) -> Result<u64> {
    if m == 0 || m > 80 {
        return Err(Error::domain(format!("Fibonacci index {m} outside 1..=80")));
    }
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 2..m {
        let c = a + b;
        a = b;
        b = c;
    }
    Ok(b)
}

/// Rank-1 lattice {(i/F_m, frac(i·F_{m−1}/F_m))}, N = F_m points in d = 2.
pub fn fibonacci_lattice(m: u32) -> Result<CubatureRule> {
    if m < 2 {
        return Err(Error::domain("Fibonacci lattice needs m >= 2"));
    }
    if m > 40 {
        return Err(Error::capacity(format!("Fibonacci lattice m = {m} is past the desk-scale cap 40")));
    }
    let n = u128::from(fibonacci(m)?);
    let g = u128::from(fibonacci(m - 1)?);
    let mut coords = Vec::with_capacity(2 * n as usize);
    for i in 0..n {
        coords.push(Coord::new(i, n));
        coords.push(Coord::new(i * g % n, n));
    }
    CubatureRule::equal_weight(coords, 2)
}

/// N equispaced points i/N on the 1-torus, equal weights (the periodic
/// trapezoidal rule).
pub fn equispaced(count: usize) -> Result<CubatureRule> {
    if count == 0 {
        return Err(Error::domain("rule needs at least one point"));
    }
    let n = count as u128;
    let coords = (0..n).map(|i| Coord::new(i, n)).collect();
    CubatureRule::equal_weight(coords, 1)
}

/// Smolyak combination of tensorized periodic trapezoidal (left-endpoint)
/// rules: levels |l|₁ ∈ [L−d+1, L] with coefficients
/// (−1)^{L−|l|₁}·binom(d−1, L−|l|₁); coincident nodes merged exactly,
/// zero-weight nodes dropped.
pub fn sparse_grid(level: u32, d: usize) -> Result<CubatureRule> {
    if d == 0 {
        return Err(Error::domain("rule dimension must be at least 1"));
    }
    if level + 6 > 30 || d > 8 {
        return Err(Error::capacity(format!(
            "sparse grid (L = {level}, d = {d}) is past the desk-scale cap"
        )));
    }
    let mut merged: BTreeMap<Vec<Coord>, Weight> = BTreeMap::new();
    let low = (level + 1).saturating_sub(d as u32);
    for total in low..=level {
        let q = level - total;
        let coeff = sign(q) * Weight::from_integer(binom(d as u32 - 1, q) as i128);
        for levels in crate::util::compositions(total, d) {
            let node_weight = coeff.clone() / Weight::from_integer(1i128 << total);
            tensor_nodes(&levels, &node_weight, &mut merged);
        }
    }
    merged.retain(|_, w| !w.is_zero());
    let mut coords = Vec::with_capacity(merged.len() * d);
    let mut weights = Vec::with_capacity(merged.len());
    for (node, w) in merged {
        coords.extend(node);
        weights.push(w);
    }
    CubatureRule::new(coords, weights, d)
}

fn sign(q: u32) -> Weight {
    if q % 2 == 0 {
        Weight::one()
    } else {
        -Weight::one()
    }
}

fn binom(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1u64;
    for j in 0..u64::from(k) {
        out = out * (u64::from(n) - j) / (j + 1);
    }
    out
}

/// Adds every node of the tensor grid with 2^{l_j} left endpoints per axis.
fn tensor_nodes(levels: &[u32], weight: &Weight, merged: &mut BTreeMap<Vec<Coord>, Weight>) {
    let mut node = vec![Coord::zero(); levels.len()];
    push_axis(levels, 0, weight, &mut node, merged);
}

fn push_axis(
    levels: &[u32],
    j: usize,
    weight: &Weight,
    node: &mut Vec<Coord>,
    merged: &mut BTreeMap<Vec<Coord>, Weight>,
) {
    if j == levels.len() {
        let w = merged.entry(node.clone()).or_insert_with(Weight::zero);
        *w += weight;
        return;
    }
    let count = 1u128 << levels[j];
    for i in 0..count {
        node[j] = Coord::new(i, count);
        push_axis(levels, j + 1, weight, node, merged);
    }
}

/// A componentwise torus shift with its seed provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftVector {
    offsets: Vec<f64>,
    seed: u64,
    index: u64,
}

impl ShiftVector {
    /// The identity shift (all offsets 0).
    pub fn zero(d: usize) -> ShiftVector {
        ShiftVector { offsets: vec![0.0; d], seed: 0, index: 0 }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

/// Shift number `index` of the stream for `seed`: component j is drawn from
/// the counter-based generator at position index·d + j, so replicas can pull
/// disjoint shifts in parallel and replay exactly.
pub fn random_shift(seed: u64, d: usize, index: u64) -> ShiftVector {
    let offsets = (0..d as u64)
        .map(|j| {
            let pos = index * d as u64 + j;
            to_unit(mix64(seed.wrapping_add(mix64(pos))))
        })
        .collect();
    ShiftVector { offsets, seed, index }
}

/// Top 53 bits as a float in [0,1).
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * f64::powi(2.0, -53)
}

/// frac(x + η) with the torus convention frac(1) = 0.
pub fn apply_shift(x: f64, eta: f64) -> f64 {
    let s = x + eta;
    if s >= 1.0 {
        s - 1.0
    } else {
        s
    }
}
