//! Net-quality checks: the exhaustive order-σ t-value search and the
//! box-counting equidistribution test.
//!
//! Both are combinatorial by definition and meant for desk-scale inputs; the
//! t-value search refuses up front when the selection space is too large.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::f2::matrix::GeneratingMatrixSet;
use crate::f2::points::PointSet;

/// Hard cap on the number of row-index selections the t-value search visits.
const MAX_SELECTIONS: f64 = 1.0e7;

/// One admissible per-coordinate choice of rows: the charged row indices
/// (1-based, decreasing) plus an implied fill of every row below the last
/// charged one when the charge count reaches σ.
#[derive(Clone, Debug)]
struct RowChoice {
    /// Sum of the charged indices; what the defect budget is measured in.
    weight: u32,
    /// All selected 1-based row indices, charged and filled alike.
    rows: Vec<u32>,
}

/// Enumerates the canonical maximal row choices for one coordinate.
///
/// A choice picks k ≤ σ charged indices a_1 > … > a_k ≥ 1 with Σa_j ≤ budget.
/// When k = σ every row below a_σ joins uncharged, so the returned row list
/// is the largest selection of that weight; smaller selections are subsets
/// and never independent when a superset is.
fn row_choices(sigma: u32, budget: u32) -> Vec<RowChoice> {
    let mut out = vec![RowChoice { weight: 0, rows: Vec::new() }];
    let mut stack: Vec<u32> = Vec::new();
    descend(sigma, budget, &mut stack, &mut out);
    out.sort_by_key(|c| c.weight);
    out
}

fn descend(sigma: u32, budget: u32, picked: &mut Vec<u32>, out: &mut Vec<RowChoice>) {
    let upper = match picked.last() {
        Some(&prev) => prev - 1,
        None => budget,
    };
    for a in 1..=upper.min(budget) {
        let weight: u32 = picked.iter().sum::<u32>() + a;
        if weight > budget {
            break;
        }
        picked.push(a);
        let k = picked.len() as u32;
        if k == sigma {
            // Charged quota reached: rows 1..a-1 come along for free.
            let mut rows = picked.clone();
            rows.extend(1..a);
            out.push(RowChoice { weight, rows });
        } else {
            out.push(RowChoice { weight, rows: picked.clone() });
            descend(sigma, budget, picked, out);
        }
        picked.pop();
    }
}

/// Incremental GF(2) row space with rollback, keyed by leading bit.
struct RowSpace {
    pivots: HashMap<u32, u64>,
}

enum Inserted {
    Independent(u32),
    Dependent,
}

impl RowSpace {
    fn new() -> Self {
        RowSpace { pivots: HashMap::new() }
    }

    fn insert(&mut self, mut v: u64) -> Inserted {
        while v != 0 {
            let lead = 63 - v.leading_zeros();
            match self.pivots.get(&lead) {
                Some(&basis) => v ^= basis,
                None => {
                    self.pivots.insert(lead, v);
                    return Inserted::Independent(lead);
                }
            }
        }
        Inserted::Dependent
    }

    fn remove(&mut self, lead: u32) {
        self.pivots.remove(&lead);
    }
}

/// Returns the least t such that the matrices generate an order-σ digital
/// (t, n, d)-net: every canonical row selection with charged weight at most
/// σn − t must be linearly independent over GF(2).
///
/// The search walks all selections, tracks the smallest weight at which a
/// dependence appears, and converts it back to t; no dependence at all means
/// t = 0.
pub fn verify_order_sigma_t(set: &GeneratingMatrixSet, sigma: u32) -> Result<u32> {
    if sigma == 0 {
        return Err(Error::domain("net order must be at least 1"));
    }
    let n = set.cols();
    let s = set.rows();
    let budget = sigma * n;
    if budget > s {
        return Err(Error::domain(format!(
            "order-{sigma} check needs at least {budget} rows, matrices have {s}"
        )));
    }
    let choices = row_choices(sigma, budget);
    let per_coord = choices.len() as f64;
    let total = per_coord.powi(set.dimension() as i32);
    if total > MAX_SELECTIONS {
        return Err(Error::capacity(format!(
            "t-value search would visit {total:.2e} row selections (cap {MAX_SELECTIONS:.0e}); \
             reduce n, d, or the order"
        )));
    }

    let mut space = RowSpace::new();
    // Smallest charged weight of any dependent selection found so far; the
    // all-empty selection is independent, so start one past the budget.
    let mut best = budget + 1;
    search(set, &choices, 0, 0, &mut space, &mut best);
    Ok(if best > budget { 0 } else { budget - best + 1 })
}

fn search(
    set: &GeneratingMatrixSet,
    choices: &[RowChoice],
    coord: usize,
    weight: u32,
    space: &mut RowSpace,
    best: &mut u32,
) {
    if coord == set.dimension() {
        return;
    }
    let mat = set.matrix(coord);
    for choice in choices {
        let w = weight + choice.weight;
        if w >= *best {
            break; // choices are weight-sorted; nothing cheaper follows
        }
        let mut added = Vec::with_capacity(choice.rows.len());
        let mut dependent = false;
        for &a in &choice.rows {
            match space.insert(mat.row(a - 1)) {
                Inserted::Independent(lead) => added.push(lead),
                Inserted::Dependent => {
                    dependent = true;
                    break;
                }
            }
        }
        if dependent {
            *best = w;
        } else {
            search(set, choices, coord + 1, w, space, best);
        }
        for lead in added {
            space.remove(lead);
        }
    }
}

/// True iff every dyadic box of order n − t (level sum n − t across the
/// coordinates, half-open intervals) contains exactly 2^t points.
pub fn check_equidistribution(ps: &PointSet, t: u32) -> Result<bool> {
    let count = ps.len();
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::domain(format!(
            "equidistribution needs 2^n points, got {count}"
        )));
    }
    let n = count.trailing_zeros();
    if t > n {
        return Err(Error::domain(format!("t = {t} exceeds n = {n}")));
    }
    let m = n - t;
    let d = ps.dimension();
    let p = ps.precision();
    let per_box = 1u64 << t;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for levels in crate::util::compositions(m, d) {
        counts.clear();
        for i in 0..count {
            let mut key = 0u64;
            for (j, &l) in levels.iter().enumerate() {
                key = (key << l) | leading_digits(ps.numerator(i, j), p, l);
            }
            *counts.entry(key).or_insert(0) += 1;
        }
        if counts.values().any(|&c| c != per_box) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First l binary digits of num/2^p as an integer, exact for dyadic input.
fn leading_digits(num: u64, p: u32, l: u32) -> u64 {
    if l == 0 {
        0
    } else if l <= p {
        num >> (p - l)
    } else {
        num << (l - p)
    }
}
