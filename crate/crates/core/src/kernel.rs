//! Reproducing kernels of the mixed-smoothness periodic Sobolev space and
//! the worst-case-error engine.
//!
//! The univariate kernel is 1 + (−1)^{r+1} B_{2r}(|x−y|)/(2r)! for integer
//! smoothness r (closed form) and a truncated cosine series for arbitrary
//! real r > 1/2; the d-variate kernel is the product over coordinates.
//!
//! The squared worst-case error of a rule with Σλ = 1 reduces to
//! ΣΣ λ_i λ_j (K(x^i,x^j) − 1) because the kernel integrates to 1 in each
//! argument. The float engine evaluates and accumulates those terms in
//! double-double arithmetic over a fixed block schedule; the exact engine
//! reruns everything in arbitrary-precision rationals.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::exec;
use crate::generators::{Coord, CubatureRule, Weight};

/// How the univariate kernel is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelForm {
    /// Bernoulli-polynomial closed form; integer r ∈ {1, 2} only.
    Closed,
    /// Truncated cosine series; any real r > 1/2.
    Series,
}

/// Kernel of H^r_mix on the d-torus plus evaluation parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    dim: usize,
    r: f64,
    form: KernelForm,
    eps: f64,
}

impl KernelSpec {
    /// Closed-form kernel; the only degrees with a shipped Bernoulli
    /// polynomial are r = 1 and r = 2.
    pub fn closed(dim: usize, r: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("kernel dimension must be at least 1"));
        }
        if r != 1 && r != 2 {
            return Err(Error::domain(format!("closed form needs r in {{1,2}}, got {r}")));
        }
        Ok(KernelSpec { dim, r: f64::from(r), form: KernelForm::Closed, eps: 0.0 })
    }

    /// Series kernel truncated so the analytic tail bound stays below eps.
    pub fn series(dim: usize, r: f64, eps: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("kernel dimension must be at least 1"));
        }
        if !(r > 0.5) {
            return Err(Error::domain(format!("smoothness r = {r} must exceed 1/2")));
        }
        if !(eps > 0.0) {
            return Err(Error::domain(format!("series tolerance {eps} must be positive")));
        }
        Ok(KernelSpec { dim, r, form: KernelForm::Series, eps })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> f64 {
        self.r
    }

    pub fn form(&self) -> KernelForm {
        self.form
    }

    /// Smoothness as an exact small integer, when it is one.
    pub fn integer_r(&self) -> Option<u32> {
        if self.r == 1.0 {
            Some(1)
        } else if self.r == 2.0 {
            Some(2)
        } else {
            None
        }
    }

    /// Series length K from the integral tail bound
    /// 2(2π)^{−2r} K^{1−2r}/(2r−1) < eps, floored at 16 terms.
    pub fn series_terms(&self) -> usize {
        let tau = std::f64::consts::TAU;
        let need = (2.0 / (tau.powf(2.0 * self.r) * (2.0 * self.r - 1.0) * self.eps))
            .powf(1.0 / (2.0 * self.r - 1.0));
        (need.ceil() as usize).max(16)
    }
}

/// B₂(t) = t(t−1) + 1/6 or B₄(t) = (t(t−1))² − 1/30 on [0,1].
pub fn bernoulli_poly(degree: u32, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("argument {t} outside [0,1]")));
    }
    let u = t * (t - 1.0);
    match degree {
        2 => Ok(u + 1.0 / 6.0),
        4 => Ok(u * u - 1.0 / 30.0),
        _ => Err(Error::domain(format!("unsupported Bernoulli degree {degree}"))),
    }
}

/// Exact-rational twin of [`bernoulli_poly`].
pub fn bernoulli_poly_exact(degree: u32, t: &BigRational) -> Result<BigRational> {
    if t.is_negative() || t > &BigRational::one() {
        return Err(Error::domain(format!("argument {t} outside [0,1]")));
    }
    let u = t * (t - BigRational::one());
    match degree {
        2 => Ok(u + big_ratio(1, 6)),
        4 => Ok(&u * &u - big_ratio(1, 30)),
        _ => Err(Error::domain(format!("unsupported Bernoulli degree {degree}"))),
    }
}

fn big_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Univariate kernel value for x, y ∈ [0,1).
pub fn kernel_1d(spec: &KernelSpec, x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::domain(format!("point {v} outside [0,1)")));
        }
    }
    Ok(match spec.form {
        KernelForm::Closed => closed_1d(spec.integer_r().unwrap(), (x - y).abs()),
        KernelForm::Series => series_1d(spec.r, spec.series_terms(), x - y),
    })
}

fn closed_1d(r: u32, delta: f64) -> f64 {
    let u = delta * (delta - 1.0);
    match r {
        1 => 1.0 + 0.5 * (u + 1.0 / 6.0),
        _ => 1.0 - (u * u - 1.0 / 30.0) / 24.0,
    }
}

/// 1 + 2Σ_{k≤K} (2πk)^{−2r} cos(2πk·diff) via the Chebyshev recurrence.
///
/// Forward plain-f64 accumulation is enough: the running partial sums are
/// bounded by Σ(2πk)^{−2r} ≈ 0.084, so the rounding error stays near u·K·0.1
/// — orders below the truncation bound for every tolerance we use.
fn series_1d(r: f64, terms: usize, diff: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let theta = tau * diff;
    let two_c = 2.0 * theta.cos();
    let mut prev = 1.0;
    let mut cur = theta.cos();
    let inv = 1.0 / (tau * tau);
    let mut sum = 0.0;
    for k in 1..=terms {
        let kf = k as f64;
        let t = inv / (kf * kf); // (2πk)^{-2}
        let w = if r == 1.0 {
            t
        } else if r == 2.0 {
            t * t
        } else {
            t.powf(r)
        };
        sum += w * cur;
        let next = two_c * cur - prev;
        prev = cur;
        cur = next;
    }
    1.0 + 2.0 * sum
}

/// d-variate kernel: the product of the univariate kernels per coordinate.
pub fn kernel_dd(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != spec.dim || y.len() != spec.dim {
        return Err(Error::domain(format!(
            "points of dimension {}/{} fed to a dimension-{} kernel",
            x.len(),
            y.len(),
            spec.dim
        )));
    }
    let mut prod = 1.0;
    for j in 0..spec.dim {
        prod *= kernel_1d(spec, x[j], y[j])?;
    }
    Ok(prod)
}

/// Which arithmetic the worst-case-error engine runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithmeticMode {
    Float,
    Exact,
}

impl ArithmeticMode {
    pub fn label(self) -> &'static str {
        match self {
            ArithmeticMode::Float => "float",
            ArithmeticMode::Exact => "exact",
        }
    }
}

/// Worst-case integration error of a rule in H^r_mix.
#[derive(Clone, Debug)]
pub struct WceResult {
    /// Tag attached by the caller (generation method); empty from the engine.
    pub method: String,
    pub n_points: usize,
    /// Squared error as computed; tiny negative values are possible in
    /// float mode and are clamped only in `error`.
    pub squared: f64,
    /// sqrt(max(squared, 0)).
    pub error: f64,
    pub exact_squared: Option<BigRational>,
    pub mode: ArithmeticMode,
}

/// e² = ΣΣ λ_i λ_j (K(x^i,x^j) − 1), using ∫K = ∫∫K = 1.
///
/// Float mode evaluates every term in double-double arithmetic and combines
/// fixed blocks in order, so the parallel and sequential schedules agree bit
/// for bit. Exact mode reruns the sum in rationals (integer r only).
pub fn worst_case_error(
    rule: &CubatureRule,
    spec: &KernelSpec,
    mode: ArithmeticMode,
) -> Result<WceResult> {
    wce_with(rule, spec, mode, false)
}

/// [`worst_case_error`] forced onto the sequential block schedule.
pub fn worst_case_error_seq(
    rule: &CubatureRule,
    spec: &KernelSpec,
    mode: ArithmeticMode,
) -> Result<WceResult> {
    wce_with(rule, spec, mode, true)
}

fn wce_with(
    rule: &CubatureRule,
    spec: &KernelSpec,
    mode: ArithmeticMode,
    sequential: bool,
) -> Result<WceResult> {
    if rule.dimension() != spec.dim {
        return Err(Error::domain(format!(
            "rule dimension {} does not match kernel dimension {}",
            rule.dimension(),
            spec.dim
        )));
    }
    match mode {
        ArithmeticMode::Exact => {
            let r = match (spec.form, spec.integer_r()) {
                (KernelForm::Closed, Some(r)) => r,
                _ => {
                    return Err(Error::domain(
                        "exact mode needs the closed-form kernel with integer r",
                    ))
                }
            };
            let squared = wce_exact(rule, r);
            let approx = squared.to_f64().unwrap_or(f64::NAN);
            Ok(WceResult {
                method: String::new(),
                n_points: rule.len(),
                squared: approx,
                error: approx.max(0.0).sqrt(),
                exact_squared: Some(squared),
                mode,
            })
        }
        ArithmeticMode::Float => {
            let squared = wce_float(rule, spec, sequential);
            Ok(WceResult {
                method: String::new(),
                n_points: rule.len(),
                squared,
                error: squared.max(0.0).sqrt(),
                exact_squared: None,
                mode,
            })
        }
    }
}

/// Hoisted double-double constants for the closed forms.
struct ClosedConsts {
    sixth: Dd,
    thirtieth: Dd,
    inv24: Dd,
}

impl ClosedConsts {
    fn new() -> Self {
        ClosedConsts {
            sixth: Dd::from_div(1.0, 6.0),
            thirtieth: Dd::from_div(1.0, 30.0),
            inv24: Dd::from_div(1.0, 24.0),
        }
    }
}

/// δ = |x − y| of two rational coordinates as a double-double, correctly
/// rounded whenever the cross products fit an f64 exactly; otherwise the
/// once-rounded f64 difference (only reachable with astronomical
/// denominators).
#[inline]
fn delta_dd(na: u128, da: u128, nb: u128, db: u128, fa: f64, fb: f64) -> Dd {
    if da < (1 << 63) && db < (1 << 63) {
        let p = (na * db).abs_diff(nb * da);
        let q = da * db;
        if p < (1 << 53) && q < (1 << 53) {
            return Dd::from_div(p as f64, q as f64);
        }
    }
    Dd::from_f64((fa - fb).abs())
}

fn wce_float(rule: &CubatureRule, spec: &KernelSpec, sequential: bool) -> f64 {
    let n = rule.len();
    let d = rule.dimension();
    let pts = rule.coords_f64();
    let nums: Vec<u128> = (0..n).flat_map(|i| (0..d).map(move |j| *rule.coord(i, j).numer())).collect();
    let dens: Vec<u128> = (0..n).flat_map(|i| (0..d).map(move |j| *rule.coord(i, j).denom())).collect();
    let equal = rule.is_equal_weight();
    let wts = if equal { Vec::new() } else { rule.weights_f64() };
    let consts = ClosedConsts::new();
    let closed_r = match spec.form {
        KernelForm::Closed => spec.integer_r(),
        KernelForm::Series => None,
    };
    let series_terms = spec.series_terms();

    let pair_term = |i: usize, j: usize| -> Dd {
        let xi = &pts[i * d..(i + 1) * d];
        let xj = &pts[j * d..(j + 1) * d];
        let prod = match closed_r {
            Some(r) => {
                let mut acc = Dd::from_f64(1.0);
                for k in 0..d {
                    let delta = delta_dd(
                        nums[i * d + k],
                        dens[i * d + k],
                        nums[j * d + k],
                        dens[j * d + k],
                        xi[k],
                        xj[k],
                    );
                    acc = acc.mul(closed_pair_dd(r, delta, &consts));
                }
                acc
            }
            None => {
                let mut acc = 1.0;
                for (a, b) in xi.iter().zip(xj) {
                    acc *= series_1d(spec.r, series_terms, a - b);
                }
                Dd::from_f64(acc)
            }
        };
        let km1 = prod.add_f64(-1.0);
        if equal {
            km1
        } else {
            Dd::prod(wts[i], wts[j]).mul(km1)
        }
    };

    let per_block = |b: usize| -> Dd {
        let mut acc = Dd::ZERO;
        for i in exec::block_range(b, n) {
            acc = acc.add(pair_term(i, i));
            for j in i + 1..n {
                acc = acc.add(pair_term(i, j).mul_f64(2.0));
            }
        }
        acc
    };

    let blocks = exec::block_count(n);
    let partials = if sequential {
        exec::map_blocks_seq(blocks, per_block)
    } else {
        exec::map_blocks(blocks, per_block)
    };
    let total = partials.into_iter().fold(Dd::ZERO, Dd::add);
    let total = if equal {
        total.mul(Dd::from_div(1.0, (n * n) as f64))
    } else {
        total
    };
    total.to_f64()
}

/// Univariate closed-form kernel evaluated in double-double arithmetic.
fn closed_pair_dd(r: u32, t: Dd, c: &ClosedConsts) -> Dd {
    let u = t.mul(t.add_f64(-1.0)); // δ(δ−1)
    match r {
        1 => u.add(c.sixth).mul_f64(0.5).add_f64(1.0),
        _ => u.mul(u).sub(c.thirtieth).mul(c.inv24).neg().add_f64(1.0),
    }
}

fn wce_exact(rule: &CubatureRule, r: u32) -> BigRational {
    let n = rule.len();
    let d = rule.dimension();
    let small = rule.is_equal_weight()
        && (0..n).all(|i| (0..d).all(|j| *rule.coord(i, j).denom() < (1 << 63)));
    if !small {
        return wce_exact_generic(rule, r);
    }

    // The kernel depends only on δ, and structured rules repeat few distinct
    // delta vectors, so fold the N² pairs into multiplicities first — pure
    // u128 work — and run the rational arithmetic once per distinct vector.
    let mut counts: HashMap<Vec<(u128, u128)>, u64> = HashMap::new();
    for i in 0..n {
        for j in i..n {
            let key: Vec<(u128, u128)> = (0..d)
                .map(|k| {
                    let a = rule.coord(i, k);
                    let b = rule.coord(j, k);
                    let p = (a.numer() * b.denom()).abs_diff(b.numer() * a.denom());
                    let q = a.denom() * b.denom();
                    let g = num_integer::gcd(p, q);
                    (p / g, q / g)
                })
                .collect();
            // diagonal pairs appear once, off-diagonal twice
            *counts.entry(key).or_insert(0) += if i == j { 1 } else { 2 };
        }
    }

    let mut cache: HashMap<(u128, u128), BigRational> = HashMap::new();
    let mut total = BigRational::zero();
    for (key, mult) in counts {
        let mut prod = BigRational::one();
        for &(p, q) in &key {
            let value = cache.entry((p, q)).or_insert_with(|| {
                kernel_value_exact(r, &BigRational::new(BigInt::from(p), BigInt::from(q)))
            });
            prod *= &*value;
        }
        total += (prod - BigRational::one()) * BigRational::from_integer(BigInt::from(mult));
    }
    total / BigRational::from_integer(BigInt::from(n as u64 * n as u64))
}

/// Literal pair sum; the path for weighted rules and denominators too large
/// for exact u128 cross products.
fn wce_exact_generic(rule: &CubatureRule, r: u32) -> BigRational {
    let n = rule.len();
    let d = rule.dimension();
    let coords: Vec<BigRational> =
        (0..n).flat_map(|i| (0..d).map(move |j| coord_big(rule.coord(i, j)))).collect();
    let equal = rule.is_equal_weight();
    let weights: Vec<BigRational> = if equal {
        Vec::new()
    } else {
        rule.weights().iter().map(weight_big).collect()
    };

    let mut cache: HashMap<BigRational, BigRational> = HashMap::new();
    let mut total = BigRational::zero();
    for i in 0..n {
        for j in i..n {
            let mut prod = BigRational::one();
            for k in 0..d {
                let a = &coords[i * d + k];
                let b = &coords[j * d + k];
                let delta = if a >= b { a - b } else { b - a };
                let value = cache
                    .entry(delta)
                    .or_insert_with_key(|delta| kernel_value_exact(r, delta));
                prod *= &*value;
            }
            let km1 = prod - BigRational::one();
            let term = if equal { km1 } else { &weights[i] * &weights[j] * km1 };
            total += if i == j { term } else { big_ratio(2, 1) * term };
        }
    }
    if equal {
        total / BigRational::from_integer(BigInt::from(n as u64 * n as u64))
    } else {
        total
    }
}

/// 1 + (−1)^{r+1} B_{2r}(δ)/(2r)! in exact rationals.
fn kernel_value_exact(r: u32, delta: &BigRational) -> BigRational {
    match r {
        1 => BigRational::one() + bernoulli_poly_exact(2, delta).unwrap() / big_ratio(2, 1),
        _ => BigRational::one() - bernoulli_poly_exact(4, delta).unwrap() / big_ratio(24, 1),
    }
}

fn coord_big(c: &Coord) -> BigRational {
    BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
}

fn weight_big(w: &Weight) -> BigRational {
    BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()))
}
