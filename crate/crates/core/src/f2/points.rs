//! Dyadic point sets and the digital construction.
//!
//! Coordinates are exact dyadic rationals stored as integer numerators with a
//! shared precision: coordinate value = numerator / 2^precision ∈ [0,1).
//! Floating point only appears at output boundaries, so equidistribution
//! checks and rational oracles downstream stay exact.

use crate::error::{Error, Result};
use crate::exec;
use crate::f2::matrix::GeneratingMatrixSet;

/// A single point with exact dyadic coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicPoint {
    nums: Vec<u64>,
    precision: u32,
}

impl DyadicPoint {
    /// Builds a point from numerators; every numerator must be < 2^precision.
    pub fn new(nums: Vec<u64>, precision: u32) -> Result<Self> {
        check_numerators(&nums, precision)?;
        Ok(DyadicPoint { nums, precision })
    }

    pub fn dimension(&self) -> usize {
        self.nums.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn numerator(&self, j: usize) -> u64 {
        self.nums[j]
    }

    /// Coordinate j as the nearest f64 (exact for precision ≤ 53).
    pub fn coord_f64(&self, j: usize) -> f64 {
        scale_to_unit(self.nums[j], self.precision)
    }
}

/// An ordered list of points sharing dimension and precision.
///
/// Stored as a flat row-major numerator array so generation and kernel sums
/// can walk it without pointer chasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    nums: Vec<u64>,
    dim: usize,
    precision: u32,
}

impl PointSet {
    /// Builds a set from a flat row-major numerator array of length N·dim.
    pub fn from_numerators(nums: Vec<u64>, dim: usize, precision: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("point set dimension must be at least 1"));
        }
        if nums.len() % dim != 0 {
            return Err(Error::domain(format!(
                "numerator array length {} is not a multiple of dimension {dim}",
                nums.len()
            )));
        }
        check_numerators(&nums, precision)?;
        Ok(PointSet { nums, dim, precision })
    }

    pub fn len(&self) -> usize {
        self.nums.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Numerators of point i, one per coordinate.
    pub fn point(&self, i: usize) -> &[u64] {
        &self.nums[i * self.dim..(i + 1) * self.dim]
    }

    pub fn numerator(&self, i: usize, j: usize) -> u64 {
        self.nums[i * self.dim + j]
    }

    pub fn coord_f64(&self, i: usize, j: usize) -> f64 {
        scale_to_unit(self.numerator(i, j), self.precision)
    }

    pub fn get(&self, i: usize) -> DyadicPoint {
        DyadicPoint { nums: self.point(i).to_vec(), precision: self.precision }
    }

    /// All coordinates of point i as f64, appended to `out`.
    pub fn coords_f64_into(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.point(i).iter().map(|&v| scale_to_unit(v, self.precision)));
    }

    /// Projection onto the listed coordinate axes (order preserved).
    pub fn project(&self, axes: &[usize]) -> Result<PointSet> {
        if axes.is_empty() {
            return Err(Error::domain("projection needs at least one axis"));
        }
        if let Some(&j) = axes.iter().find(|&&j| j >= self.dim) {
            return Err(Error::domain(format!(
                "projection axis {j} out of range for dimension {}",
                self.dim
            )));
        }
        let mut nums = Vec::with_capacity(self.len() * axes.len());
        for i in 0..self.len() {
            let row = self.point(i);
            nums.extend(axes.iter().map(|&j| row[j]));
        }
        Ok(PointSet { nums, dim: axes.len(), precision: self.precision })
    }
}

fn check_numerators(nums: &[u64], precision: u32) -> Result<()> {
    if precision > 64 {
        return Err(Error::capacity(format!("precision {precision} exceeds the 64-digit cap")));
    }
    let bad = match precision {
        64 => None,
        p => nums.iter().find(|&&v| v >> p != 0),
    };
    if let Some(v) = bad {
        return Err(Error::domain(format!("numerator {v} has more than {precision} digits")));
    }
    Ok(())
}

fn scale_to_unit(num: u64, precision: u32) -> f64 {
    num as f64 * f64::powi(2.0, -(precision as i32))
}

/// Digits of ν, least-significant first: ν = Σ digit_k · 2^k.
pub fn digit_vector(nu: u64, n: u32) -> Result<Vec<u8>> {
    if n > 64 {
        return Err(Error::capacity(format!("digit count {n} exceeds the 64-digit cap")));
    }
    if n < 64 && nu >> n != 0 {
        return Err(Error::domain(format!("{nu} does not fit in {n} digits")));
    }
    Ok((0..n).map(|k| ((nu >> k) & 1) as u8).collect())
}

/// Upper bound on n so that a full 2^n-point set stays addressable.
const MAX_NET_DIGITS: u32 = 30;

/// Generates the digital net of a matrix set: point ν has coordinate digits
/// C_i · ν̄ over GF(2), most significant first, for ν = 0,…,2^n−1.
///
/// Output precision equals the row count s. The ν-range is processed in
/// fixed-size blocks so the parallel and sequential schedules produce
/// bit-identical output.
pub fn generate_digital_net(set: &GeneratingMatrixSet) -> Result<PointSet> {
    let d = set.dimension();
    let s = set.rows();
    let n = set.cols();
    if s > 64 {
        return Err(Error::capacity(format!(
            "matrix row count {s} exceeds the 64-digit coordinate cap"
        )));
    }
    if n > MAX_NET_DIGITS {
        return Err(Error::capacity(format!(
            "2^{n} points exceed the 2^{MAX_NET_DIGITS} generation cap"
        )));
    }
    let count = 1usize << n;
    let rows: Vec<&[u64]> = (0..d).map(|i| set.matrix(i).row_words()).collect();
    let blocks = exec::map_blocks(exec::block_count(count), |b| {
        let range = exec::block_range(b, count);
        let mut out = Vec::with_capacity(range.len() * d);
        for nu in range {
            let bits = nu as u64;
            for mat in &rows {
                let mut num = 0u64;
                for (a, &row) in mat.iter().enumerate() {
                    let parity = (row & bits).count_ones() & 1;
                    num |= u64::from(parity) << (s as usize - 1 - a);
                }
                out.push(num);
            }
        }
        out
    });
    Ok(PointSet { nums: blocks.concat(), dim: d, precision: s })
}

/// Digit-interlaces consecutive groups of σ coordinates into one coordinate
/// each: output digit at position r + (a−1)σ is digit a of group member r.
///
/// Output precision is σ times the input precision; the dimension shrinks by
/// a factor of σ.
pub fn interlace(ps: &PointSet, sigma: u32) -> Result<PointSet> {
    if sigma == 0 {
        return Err(Error::domain("interlacing order must be at least 1"));
    }
    let sigma_us = sigma as usize;
    if ps.dimension() % sigma_us != 0 {
        return Err(Error::domain(format!(
            "dimension {} is not divisible by interlacing order {sigma}",
            ps.dimension()
        )));
    }
    let p = ps.precision();
    let out_precision = p.checked_mul(sigma).filter(|&q| q <= 64).ok_or_else(|| {
        Error::capacity(format!(
            "interlacing precision {p}·{sigma} exceeds the 64-digit cap"
        ))
    })?;
    let d_out = ps.dimension() / sigma_us;
    let mut nums = Vec::with_capacity(ps.len() * d_out);
    for i in 0..ps.len() {
        let row = ps.point(i);
        for group in row.chunks_exact(sigma_us) {
            let mut num = 0u64;
            for (r, &g) in group.iter().enumerate() {
                for a in 0..p {
                    let digit = (g >> (p - 1 - a)) & 1;
                    num |= digit << (out_precision - 1 - (r as u32 + a * sigma));
                }
            }
            nums.push(num);
        }
    }
    Ok(PointSet { nums, dim: d_out, precision: out_precision })
}

/// Appends the equidistant coordinate i/2^n to a 2^n-point set and truncates
/// the existing coordinates to n digits.
pub fn sequence_to_net(seq: &PointSet, n: u32) -> Result<PointSet> {
    if n > MAX_NET_DIGITS {
        return Err(Error::capacity(format!(
            "2^{n} points exceed the 2^{MAX_NET_DIGITS} generation cap"
        )));
    }
    let count = 1usize << n;
    if seq.len() != count {
        return Err(Error::domain(format!(
            "need exactly 2^{n} = {count} points, got {}",
            seq.len()
        )));
    }
    let p = seq.precision();
    let d_out = seq.dimension() + 1;
    let mut nums = Vec::with_capacity(count * d_out);
    for i in 0..count {
        for &v in seq.point(i) {
            nums.push(truncate_digits(v, p, n));
        }
        nums.push(i as u64);
    }
    Ok(PointSet { nums, dim: d_out, precision: n })
}

/// First n digits of num/2^p, as a numerator over 2^n (⌊·⌋_n).
fn truncate_digits(num: u64, p: u32, n: u32) -> u64 {
    if n <= p {
        num >> (p - n)
    } else {
        num << (n - p)
    }
}
