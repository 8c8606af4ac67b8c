//! Brute-force oracles shared by the integration tests.
//!
//! Everything here is deliberately literal — tensor-grid piecewise
//! integration, definition-chasing sums, a counter RNG — so the closed
//! forms in the library are checked against code that shares nothing with
//! them beyond the public types.

#![allow(dead_code)] // each test binary uses its own slice of this module

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use hoqmc_core::f2::{BitMatrix, GeneratingMatrixSet, PointSet};
use hoqmc_core::faber::HaarIndex;
use hoqmc_core::util::mix64;

/// Counter-mode RNG: stream `i` of seed `s` is mix64(s ⊕ mix64(i)). Keeps
/// every draw reproducible from (seed, draw index) alone.
pub struct TestRng {
    seed: u64,
    counter: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.seed ^ mix64(self.counter))
    }

    /// Uniform draw in 0..bound via rejection on the top bits.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let mask = u64::MAX >> (bound - 1).leading_zeros().min(63);
        loop {
            let v = self.next_u64() & mask;
            if v < bound {
                return v;
            }
        }
    }
}

pub fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact coordinates of a dyadic point set.
pub fn rational_coords(ps: &PointSet) -> Vec<Vec<BigRational>> {
    let denom = BigInt::one() << ps.precision();
    (0..ps.len())
        .map(|i| {
            (0..ps.dimension())
                .map(|k| BigRational::new(BigInt::from(ps.numerator(i, k)), denom.clone()))
                .collect()
        })
        .collect()
}

/// The unnormalized Haar wavelet at level j, translation m, evaluated at a
/// point that is not a breakpoint: +1 on the left half of the support, −1 on
/// the right half, 0 outside.
fn wavelet_sign(j: i32, m: u64, x: &BigRational) -> i64 {
    debug_assert!(j >= 0);
    let left = BigRational::new(BigInt::from(m), BigInt::one() << j as u32);
    let mid = &left + BigRational::new(BigInt::one(), BigInt::one() << (j as u32 + 1));
    let right = &left + BigRational::new(BigInt::one(), BigInt::one() << j as u32);
    if *x > left && *x < mid {
        1
    } else if *x > mid && *x < right {
        -1
    } else {
        0
    }
}

/// μ_{j,m}(D_P) = ∫ D_P·h_{j,m} by literal piecewise integration: the grid
/// of all point coordinates and wavelet breakpoints cuts [0,1]^d into cells
/// on which D_P is a constant plus −∏x_i and the wavelet is a constant sign,
/// so each cell contributes sign·(count/N·vol − ∏(b_i²−a_i²)/2).
///
/// Requires every level ≥ 0. Exponential in d; meant for small inputs.
pub fn brute_haar_coeff(ps: &PointSet, idx: &HaarIndex) -> BigRational {
    let d = ps.dimension();
    assert_eq!(idx.dimension(), d);
    assert!(idx.levels().iter().all(|&j| j >= 0), "brute oracle needs levels >= 0");
    let coords = rational_coords(ps);
    let n = ps.len();

    // per-coordinate sorted breakpoints
    let mut cuts: Vec<Vec<BigRational>> = Vec::with_capacity(d);
    for k in 0..d {
        let j = idx.level(k) as u32;
        let m = idx.translation(k);
        let mut c = vec![
            BigRational::zero(),
            BigRational::one(),
            BigRational::new(BigInt::from(m), BigInt::one() << j),
            BigRational::new(BigInt::from(2 * m + 1), BigInt::one() << (j + 1)),
            BigRational::new(BigInt::from(m + 1), BigInt::one() << j),
        ];
        for z in &coords {
            c.push(z[k].clone());
        }
        c.sort();
        c.dedup();
        cuts.push(c);
    }

    let two = BigRational::from_integer(BigInt::from(2));
    let n_big = BigRational::from_integer(BigInt::from(n as u64));
    let mut total = BigRational::zero();
    let mut cell = vec![0usize; d]; // cell i spans cuts[k][i]..cuts[k][i+1]
    'cells: loop {
        // per-cell factors
        let mut sign: i64 = 1;
        let mut vol = BigRational::one();
        let mut xmom = BigRational::one();
        let mut mids: Vec<BigRational> = Vec::with_capacity(d);
        for k in 0..d {
            let a = &cuts[k][cell[k]];
            let b = &cuts[k][cell[k] + 1];
            let mid = (a + b) / &two;
            sign *= wavelet_sign(idx.level(k), idx.translation(k), &mid);
            if sign == 0 {
                break;
            }
            vol *= b - a;
            xmom *= (b * b - a * a) / &two;
            mids.push(mid);
        }
        if sign != 0 {
            let count = coords
                .iter()
                .filter(|z| (0..d).all(|k| z[k] <= mids[k]))
                .count();
            let count = BigRational::from_integer(BigInt::from(count as u64));
            let term = count / &n_big * vol - xmom;
            total += if sign > 0 { term } else { -term };
        }
        // odometer over cells
        for k in 0..d {
            cell[k] += 1;
            if cell[k] + 1 < cuts[k].len() {
                continue 'cells;
            }
            cell[k] = 0;
        }
        break;
    }
    total
}

/// Random square generating-matrix set: d matrices of n×n arbitrary bits.
/// Singular matrices are fine — the net just repeats points.
pub fn random_matrix_set(rng: &mut TestRng, d: usize, n: u32) -> GeneratingMatrixSet {
    let mats = (0..d)
        .map(|_| {
            let rows = (0..n).map(|_| rng.next_u64() & ((1u64 << n) - 1)).collect();
            BitMatrix::from_rows(rows, n).unwrap()
        })
        .collect();
    GeneratingMatrixSet::new(mats).unwrap()
}

/// Random index with every level in 0..=max_level.
pub fn random_index(rng: &mut TestRng, d: usize, max_level: i32) -> HaarIndex {
    let j: Vec<i32> = (0..d).map(|_| rng.below(max_level as u64 + 1) as i32).collect();
    let m: Vec<u64> = j.iter().map(|&ji| rng.below(1u64 << ji)).collect();
    HaarIndex::new(j, m).unwrap()
}
