//! Run configuration: command-line flags, an optional TOML file, and
//! built-in defaults, resolved in that order of precedence.
//!
//! Everything is validated here, before any computation starts, so a bad
//! configuration can never leave a partial output behind. The resolved
//! values are echoed into the leading comment line of every output.

use std::path::{Path, PathBuf};

use hoqmc_core::experiment::Method;
use hoqmc_core::{Error, Result};

pub const DEFAULT_SHIFTS: usize = 1000;
pub const DEFAULT_SIGMA: u32 = 2;
pub const DEFAULT_R: &str = "2";
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_D: usize = 1;

/// Truncation accuracy of the series kernel when the smoothness is not an
/// integer (the closed forms cover r = 1 and r = 2).
pub const SERIES_EPS: f64 = 1e-10;

/// A point-generation method as named on the command line: one of the
/// library methods, or the built-in one-dimensional van der Corput net
/// (identity generating matrix, so no matrix file is needed).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RunMethod {
    Vdc,
    Core(Method),
}

impl RunMethod {
    pub fn parse(s: &str) -> Result<RunMethod> {
        if s == "vdc" {
            return Ok(RunMethod::Vdc);
        }
        Method::parse(s).map(RunMethod::Core).map_err(|_| {
            Error::domain(format!(
                "unknown method '{s}' (expected vdc, order2net, order1net, halton, sparsegrid, fibonacci)"
            ))
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            RunMethod::Vdc => "vdc",
            RunMethod::Core(m) => m.name(),
        }
    }

    pub fn needs_matrices(self) -> bool {
        matches!(self, RunMethod::Core(m) if m.needs_matrices())
    }

    /// Whether the size index n means "2^n points", so the n column of a
    /// measurement table applies (as opposed to a sparse-grid level or a
    /// Fibonacci index).
    pub fn is_dyadic(self) -> bool {
        matches!(
            self,
            RunMethod::Vdc
                | RunMethod::Core(Method::Order1Net)
                | RunMethod::Core(Method::Order2Net)
                | RunMethod::Core(Method::Halton)
        )
    }
}

/// Smoothness parameter, kept in the exact textual form it will be printed
/// in (so `3/2` round-trips) next to its parsed value.
#[derive(Clone, Debug)]
pub struct Smoothness {
    pub text: String,
    pub num: u32,
    pub den: u32,
}

impl Smoothness {
    pub fn parse(s: &str) -> Result<Smoothness> {
        let bad =
            || Error::domain(format!("smoothness '{s}' is not a positive rational like 1, 3/2 or 2"));
        let (np, dp) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let num: u32 = np.parse().map_err(|_| bad())?;
        let den: u32 = dp.parse().map_err(|_| bad())?;
        if num == 0 || den == 0 {
            return Err(bad());
        }
        let text = if den == 1 { format!("{num}") } else { format!("{num}/{den}") };
        Ok(Smoothness { text, num, den })
    }

    pub fn integer(&self) -> Option<u32> {
        (self.den == 1).then_some(self.num)
    }

    pub fn value(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

/// The size-index argument: a single value or an inclusive range `A..B`.
#[derive(Clone, Debug)]
pub struct NSpec {
    pub values: Vec<u32>,
}

impl NSpec {
    pub fn parse(s: &str) -> Result<NSpec> {
        let s = s.trim();
        let bad = || Error::domain(format!("n '{s}' is not an integer or an inclusive range A..B"));
        if let Some((a, b)) = s.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(Error::domain(format!("n range {a}..{b} is empty")));
            }
            Ok(NSpec { values: (a..=b).collect() })
        } else {
            Ok(NSpec { values: vec![s.parse().map_err(|_| bad())?] })
        }
    }

    pub fn canonical(&self) -> String {
        match self.values.as_slice() {
            [one] => one.to_string(),
            many => format!("{}..{}", many[0], many[many.len() - 1]),
        }
    }

    pub fn single(&self, command: &str) -> Result<u32> {
        match self.values.as_slice() {
            [one] => Ok(*one),
            _ => Err(Error::domain(format!("{command} takes a single n, not a range"))),
        }
    }
}

/// One layer of configuration; `None` means "not given here".
#[derive(Clone, Debug, Default)]
pub struct Overlay {
    pub matrices: Option<PathBuf>,
    pub methods: Option<Vec<RunMethod>>,
    pub d: Option<usize>,
    pub n: Option<NSpec>,
    pub r: Option<Smoothness>,
    pub sigma: Option<u32>,
    pub seed: Option<u64>,
    pub shifts: Option<usize>,
    pub exact: Option<bool>,
    pub function: Option<String>,
    pub out: Option<PathBuf>,
}

/// Fully resolved configuration. `methods` and `n` stay optional because
/// their defaults are per-command; everything else has a concrete value.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub methods: Option<Vec<RunMethod>>,
    pub d: usize,
    pub n: Option<NSpec>,
    pub r: Smoothness,
    pub sigma: u32,
    pub seed: u64,
    pub shifts: usize,
    pub exact: bool,
    pub matrices: Option<PathBuf>,
    pub function: Option<String>,
    pub out: Option<PathBuf>,
}

impl Resolved {
    pub fn methods_or(&self, default: RunMethod) -> Vec<RunMethod> {
        self.methods.clone().unwrap_or_else(|| vec![default])
    }

    pub fn require_n(&self, command: &str) -> Result<&NSpec> {
        self.n
            .as_ref()
            .ok_or_else(|| Error::domain(format!("{command} needs --n (an integer or a range A..B)")))
    }
}

pub fn resolve(flags: Overlay, file: Overlay) -> Resolved {
    Resolved {
        methods: flags.methods.or(file.methods),
        d: flags.d.or(file.d).unwrap_or(DEFAULT_D),
        n: flags.n.or(file.n),
        r: flags
            .r
            .or(file.r)
            .unwrap_or_else(|| Smoothness::parse(DEFAULT_R).expect("default smoothness parses")),
        sigma: flags.sigma.or(file.sigma).unwrap_or(DEFAULT_SIGMA),
        seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        shifts: flags.shifts.or(file.shifts).unwrap_or(DEFAULT_SHIFTS),
        exact: flags.exact.or(file.exact).unwrap_or(false),
        matrices: flags.matrices.or(file.matrices),
        function: flags.function.or(file.function),
        out: flags.out.or(file.out),
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), line: 1, msg: msg.into() }
}

fn as_str<'v>(path: &Path, key: &str, v: &'v toml::Value) -> Result<&'v str> {
    v.as_str().ok_or_else(|| format_err(path, format!("key '{key}' must be a string")))
}

fn as_uint(path: &Path, key: &str, v: &toml::Value) -> Result<u64> {
    v.as_integer()
        .filter(|i| *i >= 0)
        .map(|i| i as u64)
        .ok_or_else(|| format_err(path, format!("key '{key}' must be a non-negative integer")))
}

fn parse_methods(list: &str) -> Result<Vec<RunMethod>> {
    list.split(',').map(|s| RunMethod::parse(s.trim())).collect()
}

/// Reads one TOML overlay. Keys mirror the long flags; unknown keys are
/// rejected rather than ignored so typos surface immediately.
pub fn load_config_file(path: &Path) -> Result<Overlay> {
    let text = std::fs::read_to_string(path)?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map(|s| text[..s.start].bytes().filter(|&b| b == b'\n').count() + 1)
            .unwrap_or(1);
        Error::Format { path: path.to_path_buf(), line, msg: e.message().to_string() }
    })?;

    let mut o = Overlay::default();
    for (key, value) in &table {
        match key.as_str() {
            "matrices" => o.matrices = Some(PathBuf::from(as_str(path, key, value)?)),
            "out" => o.out = Some(PathBuf::from(as_str(path, key, value)?)),
            "function" => o.function = Some(as_str(path, key, value)?.to_string()),
            "method" => {
                let methods = match value {
                    toml::Value::String(s) => parse_methods(s),
                    toml::Value::Array(items) => items
                        .iter()
                        .map(|v| RunMethod::parse(as_str(path, key, v)?))
                        .collect(),
                    _ => Err(format_err(path, "key 'method' must be a string or array of strings")),
                }
                .map_err(|e| format_err(path, e.to_string()))?;
                o.methods = Some(methods);
            }
            "d" => {
                let d = as_uint(path, key, value)?;
                if d == 0 {
                    return Err(format_err(path, "key 'd' must be at least 1"));
                }
                o.d = Some(d as usize);
            }
            "n" => {
                let spec = match value {
                    toml::Value::Integer(_) => NSpec { values: vec![as_uint(path, key, value)? as u32] },
                    toml::Value::String(s) => {
                        NSpec::parse(s).map_err(|e| format_err(path, e.to_string()))?
                    }
                    _ => return Err(format_err(path, "key 'n' must be an integer or a range string")),
                };
                o.n = Some(spec);
            }
            "r" => {
                let r = match value {
                    toml::Value::Integer(_) => Smoothness::parse(&as_uint(path, key, value)?.to_string()),
                    toml::Value::String(s) => Smoothness::parse(s),
                    _ => Err(Error::domain("key 'r' must be an integer or a string")),
                }
                .map_err(|e| format_err(path, e.to_string()))?;
                o.r = Some(r);
            }
            "sigma" => o.sigma = Some(as_uint(path, key, value)? as u32),
            "seed" => o.seed = Some(as_uint(path, key, value)?),
            "shifts" => o.shifts = Some(as_uint(path, key, value)? as usize),
            "exact" => {
                o.exact = Some(
                    value
                        .as_bool()
                        .ok_or_else(|| format_err(path, "key 'exact' must be a boolean"))?,
                )
            }
            other => return Err(format_err(path, format!("unknown key '{other}'"))),
        }
    }
    Ok(o)
}
