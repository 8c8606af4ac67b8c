//! The five subcommands, each rendering its result into a byte buffer that
//! the caller writes out atomically (or to stdout) only after the whole
//! command has succeeded.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hoqmc_core::experiment::{build_rule, convergence_sweep, Method, SweepSpec, Target, TestFunction};
use hoqmc_core::export::{self, WceRow};
use hoqmc_core::f2::{generate_digital_net, verify_order_sigma_t, BitMatrix, GeneratingMatrixSet};
use hoqmc_core::faber::haar_decay_profile;
use hoqmc_core::generators::CubatureRule;
use hoqmc_core::kernel::{worst_case_error, ArithmeticMode, KernelSpec};
use hoqmc_core::{Error, Result};

use crate::config::{Resolved, RunMethod, Smoothness, SERIES_EPS};

/// Directory searched for the default matrix file when `--matrices` is not
/// given.
pub const MATRIX_DIR_VAR: &str = "HOQMC_MATRIX_DIR";
pub const DEFAULT_MATRIX_FILE: &str = "sobol_6d_32.txt";

struct Matrices {
    set: GeneratingMatrixSet,
    path: PathBuf,
}

/// Loads generating matrices if any requested method needs them, trying the
/// flag, then the config file, then `$HOQMC_MATRIX_DIR/sobol_6d_32.txt`.
fn load_matrices(cfg: &Resolved, methods: &[RunMethod]) -> Result<Option<Matrices>> {
    if !methods.iter().any(|m| m.needs_matrices()) {
        return Ok(None);
    }
    let path = match &cfg.matrices {
        Some(p) => p.clone(),
        None => match std::env::var_os(MATRIX_DIR_VAR) {
            Some(dir) => Path::new(&dir).join(DEFAULT_MATRIX_FILE),
            None => {
                return Err(Error::domain(format!(
                    "digital-net methods need generating matrices: pass --matrices FILE or set {MATRIX_DIR_VAR}"
                )))
            }
        },
    };
    let set = GeneratingMatrixSet::load(&path)?;
    Ok(Some(Matrices { set, path }))
}

/// The full resolved configuration, serialized onto one line so that every
/// output file starts with everything needed to reproduce it.
fn comment_line(command: &str, cfg: &Resolved, methods: &[RunMethod], mats: Option<&Matrices>) -> String {
    let names: Vec<&str> = methods.iter().map(|m| m.name()).collect();
    let mut line = format!(
        "hoqmc {command} method={} d={}",
        names.join(","),
        cfg.d
    );
    if let Some(n) = &cfg.n {
        line.push_str(&format!(" n={}", n.canonical()));
    }
    line.push_str(&format!(
        " r={} sigma={} seed={} shifts={} mode={}",
        cfg.r.text,
        cfg.sigma,
        cfg.seed,
        cfg.shifts,
        if cfg.exact { "exact" } else { "float" }
    ));
    if let Some(f) = &cfg.function {
        line.push_str(&format!(" function={f}"));
    }
    if let Some(m) = mats {
        line.push_str(&format!(" matrices={} checksum={:016x}", m.path.display(), m.set.checksum()));
    }
    line
}

fn vdc_set(n: u32) -> Result<GeneratingMatrixSet> {
    GeneratingMatrixSet::new(vec![BitMatrix::identity(n)])
}

fn ensure_vdc_dim(d: usize) -> Result<()> {
    if d == 1 {
        Ok(())
    } else {
        Err(Error::domain("the built-in van der Corput net is one-dimensional (use --d 1)"))
    }
}

fn build_cli_rule(m: RunMethod, d: usize, n: u32, mats: Option<&Matrices>) -> Result<CubatureRule> {
    match m {
        RunMethod::Vdc => {
            ensure_vdc_dim(d)?;
            CubatureRule::from_point_set(&generate_digital_net(&vdc_set(n)?)?)
        }
        RunMethod::Core(method) => build_rule(method, d, n, mats.map(|m| &m.set)),
    }
}

fn kernel_spec(d: usize, r: &Smoothness) -> Result<KernelSpec> {
    match r.integer() {
        Some(k @ 1..=2) => KernelSpec::closed(d, k),
        _ => KernelSpec::series(d, r.value(), SERIES_EPS),
    }
}

fn test_function(name: &str, d: usize) -> Result<TestFunction> {
    match name {
        "kink" => TestFunction::kink(d),
        "sqrt-hat" | "sqrthat" => TestFunction::sqrt_hat(d),
        "constant" => TestFunction::constant(d),
        other => Err(Error::domain(format!(
            "unknown function '{other}' (expected kink, sqrt-hat, constant)"
        ))),
    }
}

/// `gen-points`: write the point/weight table of a single rule.
pub fn gen_points(cfg: &Resolved, out: &mut Vec<u8>) -> Result<()> {
    let methods = cfg.methods_or(RunMethod::Vdc);
    if methods.len() != 1 {
        return Err(Error::domain("gen-points takes exactly one method"));
    }
    let n = cfg.require_n("gen-points")?.single("gen-points")?;
    let mats = load_matrices(cfg, &methods)?;
    let rule = build_cli_rule(methods[0], cfg.d, n, mats.as_ref())?;
    export::write_points_csv(out, &rule, &comment_line("gen-points", cfg, &methods, mats.as_ref()))
}

/// `wce`: one worst-case-error row per (method, n), in that order.
pub fn wce(cfg: &Resolved, out: &mut Vec<u8>) -> Result<()> {
    let methods = cfg.methods_or(RunMethod::Vdc);
    let ns = cfg.require_n("wce")?.values.clone();
    let mats = load_matrices(cfg, &methods)?;
    let spec = kernel_spec(cfg.d, &cfg.r)?;
    let mode = if cfg.exact { ArithmeticMode::Exact } else { ArithmeticMode::Float };

    let mut rows = Vec::with_capacity(methods.len() * ns.len());
    for &m in &methods {
        for &n in &ns {
            let rule = build_cli_rule(m, cfg.d, n, mats.as_ref())?;
            let start = Instant::now();
            let res = worst_case_error(&rule, &spec, mode)?;
            rows.push(WceRow {
                method: m.name().to_string(),
                d: cfg.d,
                r: cfg.r.text.clone(),
                n: m.is_dyadic().then_some(n),
                count: res.n_points,
                error: res.error,
                squared: res.squared,
                mode: res.mode.label(),
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    export::write_wce_csv(out, &rows, &comment_line("wce", cfg, &methods, mats.as_ref()))
}

/// `convergence`: sweep each method over the n range; the CSV goes to the
/// main output and, when writing to a file, a two-column gnuplot series per
/// method goes next to it as `<stem>.<method>.dat`.
pub fn convergence(cfg: &Resolved, out: &mut Vec<u8>) -> Result<()> {
    let methods = cfg.methods_or(RunMethod::Core(Method::Order2Net));
    let ns = cfg.require_n("convergence")?.values.clone();
    let mats = load_matrices(cfg, &methods)?;

    let target = |d: usize| -> Result<Target> {
        match &cfg.function {
            None => {
                let r = cfg.r.integer().filter(|k| (1..=2).contains(k)).ok_or_else(|| {
                    Error::domain(
                        "convergence worst-case sweeps need r = 1 or 2; pass --function for other targets",
                    )
                })?;
                Ok(Target::WorstCase { r })
            }
            Some(name) => Ok(Target::MaxShift { f: test_function(name, d)?, shifts: cfg.shifts }),
        }
    };

    let mut records = Vec::with_capacity(methods.len());
    for &m in &methods {
        let record = match m {
            RunMethod::Vdc => {
                ensure_vdc_dim(cfg.d)?;
                let identity = vdc_set(*ns.last().expect("nonempty range"))?;
                let mut rec = convergence_sweep(&SweepSpec {
                    method: Method::Order1Net,
                    d: 1,
                    target: target(1)?,
                    ns: ns.clone(),
                    seed: cfg.seed,
                    matrices: Some(&identity),
                })?;
                rec.method = "vdc".to_string();
                rec
            }
            RunMethod::Core(method) => convergence_sweep(&SweepSpec {
                method,
                d: cfg.d,
                target: target(cfg.d)?,
                ns: ns.clone(),
                seed: cfg.seed,
                matrices: mats.as_ref().map(|m| &m.set),
            })?,
        };
        records.push(record);
    }

    let comment = comment_line("convergence", cfg, &methods, mats.as_ref());
    export::write_sweep_csv(out, &records, &comment)?;

    if let Some(path) = &cfg.out {
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        for rec in &records {
            let mut bytes = Vec::new();
            export::write_plot_series(&mut bytes, &rec.rows, &comment)?;
            let sibling = path.with_file_name(format!("{stem}.{}.dat", rec.method));
            export::write_atomic(&sibling, &bytes)?;
        }
    }
    Ok(())
}

/// Builds the generating-matrix set a net method uses at size n, together
/// with the order at which its t-value is naturally stated.
fn net_set(m: RunMethod, d: usize, n: u32, mats: Option<&Matrices>) -> Result<(GeneratingMatrixSet, u32)> {
    fn need(mats: Option<&Matrices>) -> Result<&GeneratingMatrixSet> {
        mats.map(|m| &m.set)
            .ok_or_else(|| Error::domain("this method needs a generating matrix set"))
    }
    match m {
        RunMethod::Vdc => {
            ensure_vdc_dim(d)?;
            Ok((vdc_set(n)?, 1))
        }
        RunMethod::Core(Method::Order1Net) => Ok((need(mats)?.truncate(d, n, n)?, 1)),
        RunMethod::Core(Method::Order2Net) => {
            Ok((need(mats)?.truncate(2 * d, n, n)?.interlace(2)?, 2))
        }
        _ => Err(Error::domain(format!(
            "{} has no generating matrices; use vdc, order1net or order2net",
            m.name()
        ))),
    }
}

/// `haar`: per-shell Haar coefficient maxima of one digital net, against the
/// reference decay for its verified t-value.
pub fn haar(cfg: &Resolved, out: &mut Vec<u8>) -> Result<()> {
    let methods = cfg.methods_or(RunMethod::Vdc);
    if methods.len() != 1 {
        return Err(Error::domain("haar takes exactly one method"));
    }
    let n = cfg.require_n("haar")?.single("haar")?;
    let mats = load_matrices(cfg, &methods)?;
    let (set, order) = net_set(methods[0], cfg.d, n, mats.as_ref())?;
    let t = verify_order_sigma_t(&set, order)?;
    let ps = generate_digital_net(&set)?;
    let rows = haar_decay_profile(&ps, n, t)?;
    export::write_decay_csv(out, &rows, &comment_line("haar", cfg, &methods, mats.as_ref()))
}

/// `verify`: report the t-value of a net's generating matrices at the
/// requested order σ.
pub fn verify(cfg: &Resolved, out: &mut Vec<u8>) -> Result<()> {
    let methods = cfg.methods_or(RunMethod::Vdc);
    if methods.len() != 1 {
        return Err(Error::domain("verify takes exactly one method"));
    }
    let n = cfg.require_n("verify")?.single("verify")?;
    let mats = load_matrices(cfg, &methods)?;
    let (set, _) = net_set(methods[0], cfg.d, n, mats.as_ref())?;
    let t = verify_order_sigma_t(&set, cfg.sigma)?;

    let comment = comment_line("verify", cfg, &methods, mats.as_ref());
    let mut text = format!("# {comment}\n");
    text.push_str("method,d,n,sigma,t,checksum\n");
    text.push_str(&format!(
        "{},{},{},{},{},{:016x}\n",
        methods[0].name(),
        cfg.d,
        n,
        cfg.sigma,
        t,
        set.checksum()
    ));
    out.extend_from_slice(text.as_bytes());
    Ok(())
}
