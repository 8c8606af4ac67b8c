//! Test integrands, randomized-shift error experiments, convergence sweeps,
//! and empirical rate fitting.
//!
//! Shifted errors are computed as Σλ_i(f(x_i+η) − 1) for unit-integral
//! integrands, so rules that are exact on constants report exactly 0 on the
//! constant function regardless of weight rounding. The shift stream is
//! counter-indexed, which keeps parallel and sequential sweeps bit-identical.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exec;
use crate::f2::{generate_digital_net, GeneratingMatrixSet};
use crate::generators::{
    apply_shift, fibonacci_lattice, halton_rule, random_shift, sparse_grid, standard_bases,
    CubatureRule, ShiftVector,
};
use crate::kernel::{worst_case_error, ArithmeticMode, KernelSpec};

/// (15√5/4)·max{1/5 − (x−1/2)², 0}: a C⁰ bump with one kink pair and unit
/// integral over its support [1/2−5^{−1/2}, 1/2+5^{−1/2}] ∩ [0,1].
pub fn kink_g(x: f64) -> f64 {
    let c = 15.0 * f64::sqrt(5.0) / 4.0;
    c * f64::max(0.2 - (x - 0.5) * (x - 0.5), 0.0)
}

/// (3/2)·√(v(t)) for the peak-1 tent v: square-root singularity at the
/// tent's edges, unit integral (∫√v = 2/3).
pub fn sqrt_hat_g(t: f64) -> f64 {
    1.5 * f64::sqrt(2.0 * f64::min(t, 1.0 - t).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Factor {
    Kink,
    SqrtHat,
    One,
}

/// A tensor-product integrand ∏_j g(x_j) with unit integral.
#[derive(Clone, Debug)]
pub struct TestFunction {
    name: &'static str,
    factor: Factor,
    d: usize,
    regularity: &'static str,
}

impl TestFunction {
    pub fn kink(d: usize) -> Result<Self> {
        Self::build("kink", Factor::Kink, d, "S^2_{1,inf}B")
    }

    pub fn sqrt_hat(d: usize) -> Result<Self> {
        Self::build("sqrt-hat", Factor::SqrtHat, d, "S^{3/2}_{1,inf}B")
    }

    pub fn constant(d: usize) -> Result<Self> {
        Self::build("constant", Factor::One, d, "constant")
    }

    fn build(name: &'static str, factor: Factor, d: usize, reg: &'static str) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("integrand dimension must be at least 1"));
        }
        Ok(TestFunction { name, factor, d, regularity: reg })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn regularity(&self) -> &'static str {
        self.regularity
    }

    /// ∫_{[0,1)^d} f = 1 for every shipped factor.
    pub fn integral(&self) -> BigRational {
        BigRational::one()
    }

    pub fn factor_eval(&self, x: f64) -> f64 {
        match self.factor {
            Factor::Kink => kink_g(x),
            Factor::SqrtHat => sqrt_hat_g(x),
            Factor::One => 1.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        x.iter().map(|&v| self.factor_eval(v)).product()
    }
}

/// max over shifts η of |Σλ_i f(x_i + η) − 1|, the shifted integration
/// error of the rule on a unit-integral integrand.
pub fn max_shift_error(
    rule: &CubatureRule,
    f: &TestFunction,
    shifts: &[ShiftVector],
) -> Result<f64> {
    shift_error_with(rule, f, shifts, false)
}

/// [`max_shift_error`] forced onto the sequential block schedule.
pub fn max_shift_error_seq(
    rule: &CubatureRule,
    f: &TestFunction,
    shifts: &[ShiftVector],
) -> Result<f64> {
    shift_error_with(rule, f, shifts, true)
}

fn shift_error_with(
    rule: &CubatureRule,
    f: &TestFunction,
    shifts: &[ShiftVector],
    force_seq: bool,
) -> Result<f64> {
    if f.dimension() != rule.dimension() {
        return Err(Error::domain(format!(
            "integrand dimension {} does not match rule dimension {}",
            f.dimension(),
            rule.dimension()
        )));
    }
    if shifts.is_empty() {
        return Err(Error::domain("need at least one shift"));
    }
    if let Some(s) = shifts.iter().find(|s| s.offsets().len() != rule.dimension()) {
        return Err(Error::domain(format!(
            "shift dimension {} does not match rule dimension {}",
            s.offsets().len(),
            rule.dimension()
        )));
    }
    let d = rule.dimension();
    let coords = rule.coords_f64();
    let weights = rule.weights_f64();
    let one_shift = |eta: &ShiftVector| -> f64 {
        // Σλ_i(f−1) rather than Σλ_i f − 1: the weights sum to 1 exactly in
        // rational form, so the constant part cancels before rounding.
        let mut sum = 0.0;
        for i in 0..rule.len() {
            let mut prod = 1.0;
            for j in 0..d {
                prod *= f.factor_eval(apply_shift(coords[i * d + j], eta.offsets()[j]));
            }
            sum += weights[i] * (prod - 1.0);
        }
        sum.abs()
    };
    let blocks = exec::block_count(shifts.len());
    let per_block = |b: usize| -> f64 {
        exec::block_range(b, shifts.len())
            .map(|s| one_shift(&shifts[s]))
            .fold(0.0, f64::max)
    };
    let maxima = if force_seq {
        exec::map_blocks_seq(blocks, per_block)
    } else {
        exec::map_blocks(blocks, per_block)
    };
    Ok(maxima.into_iter().fold(0.0, f64::max))
}

/// Point-set construction recipes a sweep can iterate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Digit-interlaced (σ=2) digital net from 2d generating matrices.
    Order2Net,
    /// Plain digital net from the first d of the same matrices.
    Order1Net,
    Halton,
    SparseGrid,
    Fibonacci,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "order2net" => Ok(Method::Order2Net),
            "order1net" => Ok(Method::Order1Net),
            "halton" => Ok(Method::Halton),
            "sparsegrid" => Ok(Method::SparseGrid),
            "fibonacci" => Ok(Method::Fibonacci),
            other => Err(Error::domain(format!(
                "unknown method '{other}' (expected order2net, order1net, halton, sparsegrid, fibonacci)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Order2Net => "order2net",
            Method::Order1Net => "order1net",
            Method::Halton => "halton",
            Method::SparseGrid => "sparsegrid",
            Method::Fibonacci => "fibonacci",
        }
    }

    pub fn needs_matrices(self) -> bool {
        matches!(self, Method::Order2Net | Method::Order1Net)
    }
}

/// Builds the rule for one sweep cell. `n` is the dyadic exponent for nets
/// and Halton (N = 2^n), the level for sparse grids, and the Fibonacci index
/// for lattices; the actual point count is read off the returned rule.
pub fn build_rule(
    method: Method,
    d: usize,
    n: u32,
    matrices: Option<&GeneratingMatrixSet>,
) -> Result<CubatureRule> {
    match method {
        Method::Order2Net | Method::Order1Net => {
            let base = matrices.ok_or_else(|| {
                Error::domain(format!("method {} needs a generating matrix set", method.name()))
            })?;
            let width = if method == Method::Order2Net { 2 * d } else { d };
            let set = base.truncate(width, n, n)?;
            let set = if method == Method::Order2Net { set.interlace(2)? } else { set };
            CubatureRule::from_point_set(&generate_digital_net(&set)?)
        }
        Method::Halton => halton_rule(1usize << n, &standard_bases(d)),
        Method::SparseGrid => sparse_grid(n, d),
        Method::Fibonacci => {
            if d != 2 {
                return Err(Error::domain("Fibonacci lattices are two-dimensional"));
            }
            fibonacci_lattice(n)
        }
    }
}

/// What a sweep measures per cell.
#[derive(Clone, Debug)]
pub enum Target {
    /// Worst-case error in H^r_mix (floating engine).
    WorstCase { r: u32 },
    /// Maximum shifted integration error over a fixed shift table.
    MaxShift { f: TestFunction, shifts: usize },
}

#[derive(Clone, Debug)]
pub struct SweepSpec<'a> {
    pub method: Method,
    pub d: usize,
    pub target: Target,
    pub ns: Vec<u32>,
    pub seed: u64,
    pub matrices: Option<&'a GeneratingMatrixSet>,
}

/// One measured sweep cell.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: u32,
    pub count: u64,
    pub error: f64,
    pub seconds: f64,
}

/// A complete sweep with its provenance header.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub method: String,
    pub d: usize,
    /// Smoothness parameter or regularity label of the target.
    pub label: String,
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    pub seed: u64,
    pub matrix_checksum: Option<u64>,
    pub mode: &'static str,
}

/// Runs one method over a strictly increasing `n` range, recording the
/// measured error and runtime per cell and a plain fitted rate when at
/// least four cells are present. The shift table (when the target is a
/// shifted error) is drawn once and shared across all cells.
pub fn convergence_sweep(spec: &SweepSpec) -> Result<ConvergenceRecord> {
    if spec.ns.is_empty() {
        return Err(Error::domain("sweep needs at least one n"));
    }
    if !spec.ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("n range must be strictly increasing"));
    }
    if spec.d == 0 {
        return Err(Error::domain("sweep dimension must be at least 1"));
    }
    let shift_table: Vec<ShiftVector> = match &spec.target {
        Target::MaxShift { shifts, .. } => {
            if *shifts == 0 {
                return Err(Error::domain("shift count must be at least 1"));
            }
            (0..*shifts as u64).map(|i| random_shift(spec.seed, spec.d, i)).collect()
        }
        Target::WorstCase { .. } => Vec::new(),
    };
    let mut rows: Vec<SweepRow> = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let rule = build_rule(spec.method, spec.d, n, spec.matrices)?;
        let started = Instant::now();
        let error = match &spec.target {
            Target::WorstCase { r } => {
                let kspec = KernelSpec::closed(spec.d, *r)?;
                worst_case_error(&rule, &kspec, ArithmeticMode::Float)?.error
            }
            Target::MaxShift { f, .. } => max_shift_error(&rule, f, &shift_table)?,
        };
        let seconds = started.elapsed().as_secs_f64();
        if !(error > 0.0) {
            return Err(Error::domain(format!(
                "measured error {error} at n = {n} is not positive"
            )));
        }
        if let Some(prev) = rows.last() {
            if rule.len() as u64 <= prev.count {
                return Err(Error::domain(format!(
                    "point counts must increase: {} after {}",
                    rule.len(),
                    prev.count
                )));
            }
        }
        rows.push(SweepRow { n, count: rule.len() as u64, error, seconds });
    }
    let fit = if rows.len() >= 4 { fit_rate_rows(&rows, false).ok() } else { None };
    Ok(ConvergenceRecord {
        method: spec.method.name().to_string(),
        d: spec.d,
        label: match &spec.target {
            Target::WorstCase { r } => r.to_string(),
            Target::MaxShift { f, .. } => f.regularity().to_string(),
        },
        rows,
        slope: fit.as_ref().map(|f| f.slope),
        residual: fit.as_ref().map(|f| f.residual),
        seed: spec.seed,
        matrix_checksum: spec.matrices.map(|m| m.checksum()),
        mode: "float",
    })
}

/// Fitted decay model log₂(error) ≈ intercept + slope·log₂N
/// (+ log_coeff·log₂log₂N when requested).
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub log_coeff: Option<f64>,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log₂ space.
    pub residual: f64,
}

/// Least-squares rate of a finished record.
pub fn fit_rate(record: &ConvergenceRecord, with_log_correction: bool) -> Result<RateFit> {
    fit_rate_rows(&record.rows, with_log_correction)
}

fn fit_rate_rows(rows: &[SweepRow], with_log_correction: bool) -> Result<RateFit> {
    if rows.len() < 4 {
        return Err(Error::domain(format!("rate fit needs at least 4 points, got {}", rows.len())));
    }
    if let Some(bad) = rows.iter().find(|r| !(r.error > 0.0)) {
        return Err(Error::domain(format!("error {} at n = {} is not positive", bad.error, bad.n)));
    }
    let xy: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.count as f64).log2(), r.error.log2()))
        .collect();
    fit_log2(&xy, with_log_correction)
}

/// Least squares over (x, y) pairs in log₂ space; `with_log` adds a
/// log₂(x) basis column. Public so synthetic data and prefix fits can use
/// the same solver.
pub fn fit_log2(xy: &[(f64, f64)], with_log: bool) -> Result<RateFit> {
    let k = if with_log { 3 } else { 2 };
    if xy.len() < k {
        return Err(Error::domain(format!("fit needs at least {k} points, got {}", xy.len())));
    }
    if with_log {
        if let Some((x, _)) = xy.iter().find(|(x, _)| *x <= 0.0) {
            return Err(Error::domain(format!(
                "log-corrected fit needs log₂N > 0, got {x}"
            )));
        }
    }
    let basis = |x: f64| -> [f64; 3] { [1.0, x, if with_log { x.log2() } else { 0.0 }] };
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(x, y) in xy {
        let row = basis(x);
        for a in 0..k {
            for b in 0..k {
                ata[a][b] += row[a] * row[b];
            }
            aty[a] += row[a] * y;
        }
    }
    let coef = solve_small(&mut ata, &mut aty, k)?;
    let mut sse = 0.0;
    for &(x, y) in xy {
        let row = basis(x);
        let yhat: f64 = (0..k).map(|a| coef[a] * row[a]).sum();
        sse += (y - yhat) * (y - yhat);
    }
    Ok(RateFit {
        slope: coef[1],
        log_coeff: if with_log { Some(coef[2]) } else { None },
        intercept: coef[0],
        residual: (sse / xy.len() as f64).sqrt(),
    })
}

/// Gaussian elimination with partial pivoting on the k×k normal equations.
fn solve_small(m: &mut [[f64; 3]; 3], b: &mut [f64; 3], k: usize) -> Result<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &bb| m[a][col].abs().total_cmp(&m[bb][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= scale * 1e-12 {
            return Err(Error::domain("degenerate fit design (all abscissae equal?)"));
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..k).rev() {
        let mut v = b[col];
        for c in (col + 1)..k {
            v -= m[col][c] * x[c];
        }
        x[col] = v / m[col][col];
    }
    Ok(x)
}
