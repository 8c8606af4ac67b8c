//! Faber hats, Haar coefficients of the discrepancy function, and Faber
//! coefficients of test functions.
//!
//! Everything here is exact: hats are piecewise linear with dyadic
//! breakpoints, points are dyadic, so coefficient computations reduce to
//! rational arithmetic. The univariate hat is the peak-1 tent v (v(1/2) = 1,
//! v = 2∫h for the L∞-normalized Haar function h), dilated and translated;
//! level −1 denotes the constant 1 factor.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec;
use crate::f2::PointSet;
use crate::generators::CubatureRule;

/// A level/translation pair per coordinate: level j_i ∈ {−1, 0, 1, …} and
/// translation m_i ∈ {0, …, 2^{max(j_i,0)}−1} (so m_i = 0 when j_i = −1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HaarIndex {
    j: Vec<i32>,
    m: Vec<u64>,
}

impl HaarIndex {
    pub fn new(j: Vec<i32>, m: Vec<u64>) -> Result<Self> {
        if j.is_empty() || j.len() != m.len() {
            return Err(Error::domain("level and translation vectors must match and be nonempty"));
        }
        for (i, (&ji, &mi)) in j.iter().zip(&m).enumerate() {
            if !(-1..=62).contains(&ji) {
                return Err(Error::domain(format!("level {ji} in coordinate {i} outside -1..=62")));
            }
            if mi >= 1u64 << ji.max(0) {
                return Err(Error::domain(format!(
                    "translation {mi} out of range for level {ji} in coordinate {i}"
                )));
            }
        }
        Ok(HaarIndex { j, m })
    }

    /// The constant index (every level −1).
    pub fn constant(d: usize) -> Self {
        HaarIndex { j: vec![-1; d], m: vec![0; d] }
    }

    pub fn dimension(&self) -> usize {
        self.j.len()
    }

    pub fn level(&self, i: usize) -> i32 {
        self.j[i]
    }

    pub fn translation(&self, i: usize) -> u64 {
        self.m[i]
    }

    pub fn levels(&self) -> &[i32] {
        &self.j
    }

    pub fn translations(&self) -> &[u64] {
        &self.m
    }

    /// Coordinates with a non-constant factor (e(j)).
    pub fn active(&self) -> Vec<usize> {
        (0..self.j.len()).filter(|&i| self.j[i] >= 0).collect()
    }

    /// Σ j_i over active coordinates (|j|₁ on the ℕ₀ part).
    pub fn level_sum(&self) -> u32 {
        self.j.iter().filter(|&&v| v >= 0).map(|&v| v as u32).sum()
    }

    /// Σ (j_i + 1) over active coordinates (|j+1|₁ with constants free).
    pub fn plus_one_sum(&self) -> u32 {
        self.j.iter().filter(|&&v| v >= 0).map(|&v| (v + 1) as u32).sum()
    }
}

/// Univariate hat v_{j,k}(x) for x ∈ [0,1): the peak-1 tent v(2^j x − k),
/// or the constant 1 at level −1.
pub fn hat(j: i32, k: u64, x: f64) -> Result<f64> {
    check_level_shift(j, k)?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::domain(format!("point {x} outside [0,1)")));
    }
    if j < 0 {
        return Ok(1.0);
    }
    let y = f64::powi(2.0, j) * x - k as f64;
    Ok(tent_f64(y))
}

fn check_level_shift(j: i32, k: u64) -> Result<()> {
    if !(-1..=62).contains(&j) {
        return Err(Error::domain(format!("level {j} outside -1..=62")));
    }
    if k >= 1u64 << j.max(0) {
        return Err(Error::domain(format!("translation {k} out of range for level {j}")));
    }
    Ok(())
}

fn tent_f64(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else if y <= 0.5 {
        2.0 * y
    } else {
        2.0 * (1.0 - y)
    }
}

/// Exact twin of [`hat`]; reduces x mod 1 first, so stencil points past the
/// right edge wrap around the torus.
pub fn hat_rational(j: i32, k: u64, x: &BigRational) -> Result<BigRational> {
    check_level_shift(j, k)?;
    if j < 0 {
        return Ok(BigRational::one());
    }
    let xf = x - x.floor();
    let y = xf * BigRational::from_integer(BigInt::one() << j) - big_int(k);
    Ok(tent_rational(&y))
}

fn tent_rational(y: &BigRational) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if y <= &BigRational::zero() || y >= &BigRational::one() {
        BigRational::zero()
    } else if y <= &half {
        y * big_int(2)
    } else {
        (BigRational::one() - y) * big_int(2)
    }
}

fn big_int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

fn pow2_inv(e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e)
}

/// Tensor hat at an exact rational point.
pub fn hat_tensor_rational(idx: &HaarIndex, x: &[BigRational]) -> Result<BigRational> {
    if x.len() != idx.dimension() {
        return Err(Error::domain(format!(
            "point dimension {} does not match index dimension {}",
            x.len(),
            idx.dimension()
        )));
    }
    let mut prod = BigRational::one();
    for i in 0..x.len() {
        prod *= hat_rational(idx.level(i), idx.translation(i), &x[i])?;
        if prod.is_zero() {
            break;
        }
    }
    Ok(prod)
}

/// ∫ of the tensor hat: 2^{−(j_i+1)} per active coordinate, 1 per constant.
pub fn hat_integral(idx: &HaarIndex) -> BigRational {
    pow2_inv(idx.plus_one_sum())
}

/// c_{j,m}(P): point average of the tensor hat minus its integral, for an
/// equal-weight rule. Exact because nodes are rational.
pub fn faber_error_coeff(rule: &CubatureRule, idx: &HaarIndex) -> Result<BigRational> {
    if !rule.is_equal_weight() {
        return Err(Error::domain("hat error coefficients need an equal-weight rule"));
    }
    if rule.dimension() != idx.dimension() {
        return Err(Error::domain(format!(
            "rule dimension {} does not match index dimension {}",
            rule.dimension(),
            idx.dimension()
        )));
    }
    let mut sum = BigRational::zero();
    let mut x = Vec::with_capacity(rule.dimension());
    for i in 0..rule.len() {
        x.clear();
        x.extend(
            rule.point(i)
                .iter()
                .map(|c| BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))),
        );
        sum += hat_tensor_rational(idx, &x)?;
    }
    Ok(sum / big_int(rule.len() as u64) - hat_integral(idx))
}

/// Local discrepancy N^{−1}#{z ∈ P : z ≤ x componentwise} − ∏x_i with the
/// closed-interval counting convention; x_i ∈ [0,1] with 1 meaning the full
/// range in that coordinate.
pub fn discrepancy_eval(ps: &PointSet, x: &[f64]) -> Result<f64> {
    if x.len() != ps.dimension() {
        return Err(Error::domain(format!(
            "evaluation point dimension {} does not match set dimension {}",
            x.len(),
            ps.dimension()
        )));
    }
    if let Some(&v) = x.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::domain(format!("corner coordinate {v} outside [0,1]")));
    }
    let mut count = 0usize;
    for i in 0..ps.len() {
        let inside = (0..x.len()).all(|k| ps.coord_f64(i, k) <= x[k]);
        if inside {
            count += 1;
        }
    }
    let volume: f64 = x.iter().product();
    Ok(count as f64 / ps.len() as f64 - volume)
}

/// μ_{j,m} of the discrepancy of P: the Haar coefficient
/// ∫ D_P·h_{j,m}, evaluated by the exact per-point closed form — the
/// indicator part integrates to −2^{−(j_i+1)} v_{j_i,m_i}(z_i) per
/// coordinate and the volume part to −2^{−(2j_i+2)}.
///
/// Levels j_i = −1 are handled by projecting P onto the active coordinates
/// first. Points are dyadic by construction, so no quadrature fallback is
/// ever taken.
pub fn haar_coeff_discrepancy(ps: &PointSet, idx: &HaarIndex) -> Result<BigRational> {
    if idx.dimension() != ps.dimension() {
        return Err(Error::domain(format!(
            "index dimension {} does not match set dimension {}",
            idx.dimension(),
            ps.dimension()
        )));
    }
    let active = idx.active();
    if active.is_empty() {
        return Err(Error::domain("need at least one non-constant level"));
    }
    if active.len() < idx.dimension() {
        let projected = ps.project(&active)?;
        let sub = HaarIndex::new(
            active.iter().map(|&i| idx.level(i)).collect(),
            active.iter().map(|&i| idx.translation(i)).collect(),
        )?;
        return haar_coeff_discrepancy(&projected, &sub);
    }

    let d = idx.dimension();
    let n = ps.len();
    let denom = BigInt::one() << ps.precision();
    let mut point_sum = BigRational::zero();
    for i in 0..n {
        let mut prod = BigRational::one();
        for k in 0..d {
            let z = BigRational::new(BigInt::from(ps.numerator(i, k)), denom.clone());
            let v = hat_rational(idx.level(k), idx.translation(k), &z)?;
            if v.is_zero() {
                prod = BigRational::zero();
                break;
            }
            prod *= v * pow2_inv((idx.level(k) + 1) as u32);
        }
        point_sum += prod;
    }
    let sign = if d % 2 == 0 { BigRational::one() } else { -BigRational::one() };
    let volume: BigRational = (0..d).map(|k| pow2_inv((2 * idx.level(k) + 2) as u32)).product();
    Ok(sign * (point_sum / big_int(n as u64) - volume))
}

/// One shell of the coefficient decay table.
#[derive(Clone, Debug)]
pub struct DecayRow {
    pub ell: u32,
    pub max_mu: BigRational,
    pub bound: f64,
}

impl DecayRow {
    pub fn max_mu_f64(&self) -> f64 {
        self.max_mu.to_f64().unwrap_or(f64::NAN)
    }

    pub fn ratio(&self) -> f64 {
        self.max_mu_f64() / self.bound
    }
}

/// Reference decay rate for the shell |j|₁ = ℓ of a (t, n, d)-net:
/// 2^{−2n+t}(2n−t−2ℓ)^{d−1} up to the critical shell, 2^{−ℓ−n+t/2} beyond.
pub fn decay_bound(ell: u32, n: u32, t: u32, d: usize) -> f64 {
    let critical = n as i64 - (t as i64 + 1) / 2;
    if (ell as i64) < critical {
        let base = f64::powi(2.0, t as i32 - 2 * n as i32);
        let width = (2 * n as i64 - t as i64 - 2 * ell as i64) as f64;
        base * width.powi(d as i32 - 1)
    } else {
        f64::powf(2.0, -(ell as f64) - n as f64 + t as f64 / 2.0)
    }
}

/// Exact per-shell maxima of |μ_{j,m}| over all j ∈ ℕ₀^d with |j|₁ = ℓ and
/// all translations m, for ℓ = 0..n, next to the reference bound.
///
/// Work guard: every point lands in exactly one translation per level
/// vector, so a shell costs O(#levels·(N + 2^ℓ)); the whole table is
/// refused when 2^{n+ℓ_max} would pass 2²⁶.
pub fn haar_decay_profile(ps: &PointSet, n: u32, t: u32) -> Result<Vec<DecayRow>> {
    let d = ps.dimension();
    if ps.len() != 1usize << n {
        return Err(Error::domain(format!(
            "point count {} is not 2^{n}",
            ps.len()
        )));
    }
    if t > n {
        return Err(Error::domain(format!("t = {t} exceeds n = {n}")));
    }
    if n + n > 26 {
        return Err(Error::capacity(format!(
            "decay table up to shell {n} needs 2^{} work units (cap 2^26)",
            2 * n
        )));
    }
    let mut rows = Vec::with_capacity(n as usize + 1);
    for ell in 0..=n {
        let levels: Vec<Vec<u32>> = crate::util::compositions(ell, d);
        let maxima = exec::map_blocks(exec::block_count(levels.len()), |b| {
            exec::block_range(b, levels.len())
                .map(|li| shell_level_max(ps, &levels[li]))
                .collect::<Vec<BigRational>>()
        });
        let max_mu = maxima
            .into_iter()
            .flatten()
            .max()
            .unwrap_or_else(BigRational::zero);
        rows.push(DecayRow { ell, max_mu, bound: decay_bound(ell, n, t, d) });
    }
    Ok(rows)
}

/// max_m |μ_{j,m}| for one level vector j ≥ 0, via one bucketing pass:
/// point z contributes only to m_i = ⌊2^{j_i} z_i⌋ (tent boundaries give 0).
fn shell_level_max(ps: &PointSet, j: &[u32]) -> BigRational {
    let d = ps.dimension();
    let n = ps.len();
    let ell: u32 = j.iter().sum();
    let denom = BigInt::one() << ps.precision();
    let mut buckets: Vec<BigRational> = vec![BigRational::zero(); 1usize << ell];
    let mut occupied = vec![false; 1usize << ell];
    let plus_one: u32 = j.iter().map(|&v| v + 1).sum();
    let scale = pow2_inv(plus_one);
    for i in 0..n {
        let mut prod = BigRational::one();
        let mut slot = 0usize;
        for k in 0..d {
            let num = ps.numerator(i, k);
            let p = ps.precision();
            let m = leading(num, p, j[k]);
            slot = (slot << j[k]) + m as usize;
            let z = BigRational::new(BigInt::from(num), denom.clone());
            let v = hat_rational(j[k] as i32, m, &z).expect("bucket translation in range");
            if v.is_zero() {
                prod = BigRational::zero();
                break;
            }
            prod *= v;
        }
        if !prod.is_zero() {
            buckets[slot] += prod;
        }
        occupied[slot] = true;
    }
    // μ_m = ±2^{−|j+1|}(S_m/N − 2^{−|j+1|}); empty boxes all share |μ| =
    // 2^{−2|j+1|}.
    let integral = pow2_inv(plus_one);
    let mut best = if occupied.iter().all(|&o| o) {
        BigRational::zero()
    } else {
        &scale * &integral
    };
    let n_big = big_int(n as u64);
    for (slot, s) in buckets.iter().enumerate() {
        if !occupied[slot] {
            continue;
        }
        let mu = (&scale * (s / &n_big - &integral)).abs();
        if mu > best {
            best = mu;
        }
    }
    best
}

/// First `l` digits of num/2^p (the bucket of the level-l partition).
fn leading(num: u64, p: u32, l: u32) -> u64 {
    if l == 0 {
        0
    } else if l <= p {
        num >> (p - l)
    } else {
        num << (l - p)
    }
}

/// A function on the d-torus, optionally exactly evaluable at rationals.
pub trait TorusFn {
    fn dimension(&self) -> usize;
    fn eval_f64(&self, x: &[f64]) -> f64;
    /// None when the function is floating-only.
    fn eval_rational(&self, x: &[BigRational]) -> Option<BigRational>;
}

/// Exact finite linear combination of tensor hats.
#[derive(Clone, Debug)]
pub struct HatCombination {
    dim: usize,
    terms: Vec<(BigRational, HaarIndex)>,
}

impl HatCombination {
    pub fn new(terms: Vec<(BigRational, HaarIndex)>) -> Result<Self> {
        let dim = match terms.first() {
            Some((_, idx)) => idx.dimension(),
            None => return Err(Error::domain("hat combination needs at least one term")),
        };
        if let Some((_, idx)) = terms.iter().find(|(_, idx)| idx.dimension() != dim) {
            return Err(Error::domain(format!(
                "mixed dimensions {} and {dim} in one combination",
                idx.dimension()
            )));
        }
        Ok(HatCombination { dim, terms })
    }

    pub fn terms(&self) -> &[(BigRational, HaarIndex)] {
        &self.terms
    }

    /// Exact integral: Σ coefficient · ∫hat.
    pub fn integral(&self) -> BigRational {
        self.terms.iter().map(|(c, idx)| c * hat_integral(idx)).sum()
    }

    /// Largest active level in any term (−1 if all terms are constant).
    pub fn max_level(&self) -> i32 {
        self.terms
            .iter()
            .flat_map(|(_, idx)| idx.levels().iter().copied())
            .max()
            .unwrap_or(-1)
    }
}

impl TorusFn for HatCombination {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn eval_f64(&self, x: &[f64]) -> f64 {
        let xb: Vec<BigRational> = x
            .iter()
            .map(|&v| BigRational::from_float(v).unwrap_or_else(BigRational::zero))
            .collect();
        self.eval_rational(&xb).unwrap().to_f64().unwrap_or(f64::NAN)
    }

    fn eval_rational(&self, x: &[BigRational]) -> Option<BigRational> {
        let mut sum = BigRational::zero();
        for (c, idx) in &self.terms {
            sum += c * hat_tensor_rational(idx, x).ok()?;
        }
        Some(sum)
    }
}

/// d²_{j,k}(f): mixed second differences Δ²(f) = f(x) − 2f(x+h) + f(x+2h)
/// per active direction with h_i = 2^{−(j_i+1)}, anchored at k·2^{−j}
/// (coordinates with j_i = −1 stay at 0), scaled by (−2)^{−#active}.
pub fn faber_coeff(f: &dyn TorusFn, idx: &HaarIndex) -> Result<BigRational> {
    if f.dimension() != idx.dimension() {
        return Err(Error::domain(format!(
            "function dimension {} does not match index dimension {}",
            f.dimension(),
            idx.dimension()
        )));
    }
    let active = idx.active();
    let mut total = BigRational::zero();
    let mut offsets = vec![0u8; active.len()];
    loop {
        let mut x: Vec<BigRational> = (0..idx.dimension())
            .map(|i| {
                if idx.level(i) < 0 {
                    BigRational::zero()
                } else {
                    big_int(idx.translation(i)) * pow2_inv(idx.level(i) as u32)
                }
            })
            .collect();
        let mut coeff = BigRational::one();
        for (pos, &i) in active.iter().enumerate() {
            let step = pow2_inv((idx.level(i) + 1) as u32);
            x[i] += big_int(offsets[pos]) * step;
            if offsets[pos] == 1 {
                coeff *= big_int(-2);
            }
        }
        let value = f
            .eval_rational(&x)
            .ok_or_else(|| Error::domain("function is not exactly evaluable"))?;
        total += coeff * value;
        if !advance(&mut offsets) {
            break;
        }
    }
    let mut denom = BigInt::one() << active.len();
    if active.len() % 2 == 1 {
        denom = -denom;
    }
    Ok(BigRational::new(BigInt::one(), denom) * total)
}

/// Floating twin of [`faber_coeff`] for functions without exact evaluation.
pub fn faber_coeff_f64(f: &dyn TorusFn, idx: &HaarIndex) -> Result<f64> {
    if f.dimension() != idx.dimension() {
        return Err(Error::domain(format!(
            "function dimension {} does not match index dimension {}",
            f.dimension(),
            idx.dimension()
        )));
    }
    let active = idx.active();
    let mut total = 0.0;
    let mut offsets = vec![0u8; active.len()];
    loop {
        let mut x: Vec<f64> = (0..idx.dimension())
            .map(|i| {
                if idx.level(i) < 0 {
                    0.0
                } else {
                    idx.translation(i) as f64 * f64::powi(2.0, -idx.level(i))
                }
            })
            .collect();
        let mut coeff = 1.0;
        for (pos, &i) in active.iter().enumerate() {
            let step = f64::powi(2.0, -(idx.level(i) + 1));
            x[i] += f64::from(offsets[pos]) * step;
            if x[i] >= 1.0 {
                x[i] -= 1.0;
            }
            if offsets[pos] == 1 {
                coeff *= -2.0;
            }
        }
        total += coeff * f.eval_f64(&x);
        if !advance(&mut offsets) {
            break;
        }
    }
    Ok(total * f64::powi(-2.0, -(active.len() as i32)))
}

/// Ternary odometer over stencil offsets {0,1,2}^k.
fn advance(offsets: &mut [u8]) -> bool {
    for o in offsets.iter_mut() {
        if *o < 2 {
            *o += 1;
            return true;
        }
        *o = 0;
    }
    false
}

/// Enumerates every index with all levels ≤ `max_level` (including −1) in
/// the given dimension, calling `visit` on each.
pub fn for_each_index(
    d: usize,
    max_level: i32,
    visit: &mut dyn FnMut(&HaarIndex) -> Result<()>,
) -> Result<()> {
    let mut j = vec![-1i32; d];
    loop {
        let mut m = vec![0u64; d];
        loop {
            let idx = HaarIndex::new(j.clone(), m.clone())?;
            visit(&idx)?;
            // advance translations
            let mut done = true;
            for i in 0..d {
                m[i] += 1;
                if m[i] < 1u64 << j[i].max(0) {
                    done = false;
                    break;
                }
                m[i] = 0;
            }
            if done {
                break;
            }
        }
        // advance levels
        let mut done = true;
        for i in 0..d {
            j[i] += 1;
            if j[i] <= max_level {
                done = false;
                break;
            }
            j[i] = -1;
        }
        if done {
            return Ok(());
        }
    }
}

/// Partial sum of the hat expansion Σ d²_{j,k}(f)·v_{j,k}(x) over all levels
/// ≤ `max_level`; exact, and equal to f when f is a hat combination whose
/// levels all fit under `max_level`.
pub fn faber_partial_sum(
    f: &dyn TorusFn,
    max_level: i32,
    x: &[BigRational],
) -> Result<BigRational> {
    let mut sum = BigRational::zero();
    for_each_index(f.dimension(), max_level, &mut |idx| {
        let d2 = faber_coeff(f, idx)?;
        if !d2.is_zero() {
            sum += d2 * hat_tensor_rational(idx, x)?;
        }
        Ok(())
    })?;
    Ok(sum)
}

/// Σ_j Σ_m d²_{j,m}(f)·c_{j,m}(rule) over all levels ≤ `max_level` — the
/// hat-expansion form of the integration error of the rule on f.
pub fn faber_error_series(
    f: &dyn TorusFn,
    rule: &CubatureRule,
    max_level: i32,
) -> Result<BigRational> {
    let mut sum = BigRational::zero();
    for_each_index(f.dimension(), max_level, &mut |idx| {
        let d2 = faber_coeff(f, idx)?;
        if !d2.is_zero() {
            sum += d2 * faber_error_coeff(rule, idx)?;
        }
        Ok(())
    })?;
    Ok(sum)
}
