//! Command-line front end for `hgreen-core`.

pub mod args;
pub mod check;
pub mod render;
pub mod sample;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use hgreen_core::io::{parse_function, parse_lattice_file, parse_params_file, LatticeFile};
use hgreen_core::{
    green_apply, l2_norm, schatten_partial, sharp_constant, sobolev_gain_check, sobolev_norm, spectrum_stream,
    Cutoffs, Error, LatticeBasis, ManifoldParams, Scalar,
};

use crate::args::{
    CheckArgs, Cli, Command, ConstantArgs, GreenArgs, ManifoldArgs, OutputArgs, SchattenArgs, SpectrumArgs,
};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(flag: &str, msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: format!("--{flag}: {msg}"),
        }
    }
}

/// Maps a library error to an exit code and a message naming the flag at fault.
pub fn map_error(e: Error) -> CliError {
    let code = match e {
        Error::BudgetExceeded { .. } | Error::ProbeTooSmall { .. } | Error::Overflow(_) => EXIT_BUDGET,
        _ => EXIT_VALIDATION,
    };
    let flag = match &e {
        Error::InvalidParam { name, .. } => name.replace('_', "-"),
        Error::InvalidR(_) => "r".into(),
        Error::BudgetExceeded { .. } => "budget".into(),
        Error::ProbeTooSmall { .. } => "probe".into(),
        Error::InvalidTerm { .. } => "input".into(),
        Error::SingularBasis(_) | Error::InvalidBasis(_) => "lattice".into(),
        _ => String::new(),
    };
    let message = if flag.is_empty() {
        e.to_string()
    } else {
        format!("--{flag}: {e}")
    };
    CliError { code, message }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Where the dual lattice came from, for the provenance block.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub params: ManifoldParams,
    pub lattice_source: String,
}

fn read(path: &Path, flag: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::validation(flag, format!("{}: {e}", path.display())))
}

pub fn load_params(m: &ManifoldArgs) -> CliResult<Loaded> {
    let (params, lattice_source) = match &m.params {
        Some(path) => {
            let file = parse_params_file(&read(path, "params")?).map_err(|e| CliError::validation("params", e))?;
            let source = match &file.lattice {
                hgreen_core::io::LatticeSpec::Named(n) => n.clone(),
                hgreen_core::io::LatticeSpec::Inline(_) => "inline".into(),
            };
            (file.into_params().map_err(map_error)?, source)
        }
        None => {
            let d = m.d.unwrap_or(1);
            if d == 0 {
                return Err(CliError::validation("d", "must be a positive integer"));
            }
            let c = parse_scalar(m.c.as_deref().unwrap_or("1"), "c")?;
            let alpha = parse_scalar(m.alpha.as_deref().unwrap_or("0"), "alpha")?.to_f64();
            let spec = m.lattice.as_deref().unwrap_or("zn");
            let (lattice, source) = load_lattice(spec, d, m.lattice_is_dual)?;
            let p = ManifoldParams::new(d, c, alpha, m.big_l.unwrap_or(1), Arc::new(lattice)).map_err(map_error)?;
            let p = match m.epsilon {
                Some(e) => p.with_epsilon(e).map_err(map_error)?,
                None => p,
            };
            (p, source)
        }
    };
    let params = match m.budget {
        Some(b) => params.with_point_budget(b),
        None => params,
    };
    Ok(Loaded {
        params,
        lattice_source,
    })
}

fn parse_scalar(s: &str, flag: &str) -> CliResult<Scalar> {
    Scalar::from_str(s).map_err(|e| CliError::validation(flag, e))
}

fn load_lattice(spec: &str, d: u32, is_dual: bool) -> CliResult<(LatticeBasis, String)> {
    let bad = |e: Error| CliError::validation("lattice", e);
    if spec == "zn" {
        return Ok((LatticeBasis::integer_lattice(2 * d as usize).map_err(bad)?, "zn".into()));
    }
    let path = Path::new(spec);
    if path.is_file() {
        let mut file = parse_lattice_file(&read(path, "lattice")?).map_err(bad)?;
        file.is_dual |= is_dual;
        return Ok((file.into_dual_lattice().map_err(bad)?, format!("file:{spec}")));
    }
    if spec.contains(',') || spec.contains(';') {
        let rows = spec
            .split(';')
            .map(|row| row.split(',').map(|x| parse_scalar(x.trim(), "lattice")).collect())
            .collect::<CliResult<Vec<Vec<Scalar>>>>()?;
        let file = LatticeFile {
            dim: rows.len(),
            rows,
            is_dual,
        };
        return Ok((file.into_dual_lattice().map_err(bad)?, "inline".into()));
    }
    Err(CliError::validation(
        "lattice",
        format!("{spec:?} is not `zn`, an existing file, or inline rows like \"1,0;0,1\""),
    ))
}

fn emit(out: &OutputArgs, body: &str) -> CliResult<()> {
    write_to(out.output.as_deref(), body)
}

fn write_to(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::validation("output", format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError {
                    code: EXIT_VALIDATION,
                    message: format!("writing output: {e}"),
                })
        }
    }
}

fn finite_nonneg(v: f64, flag: &str) -> CliResult<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(flag, format!("must be finite and >= 0, got {v}")))
    }
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> CliResult<()> {
    finite_nonneg(a.lambda_max, "lambda-max")?;
    let loaded = load_params(&a.manifold)?;
    let spec = spectrum_stream(&loaded.params, a.lambda_max, a.coalesce).map_err(map_error)?;
    let body = render::spectrum(&loaded, a, &spec, a.out.format);
    emit(&a.out, &body)
}

pub fn cmd_schatten(a: &SchattenArgs) -> CliResult<()> {
    if !(a.r >= 1.0) || !a.r.is_finite() {
        return Err(CliError::validation("r", format!("Schatten exponent must satisfy r >= 1, got {}", a.r)));
    }
    let loaded = load_params(&a.manifold)?;
    let cut = Cutoffs::new(a.n_max, a.j_max, a.norm_sq_max);
    let rep = schatten_partial(&loaded.params, a.r, &cut).map_err(map_error)?;
    emit(&a.out, &render::schatten(&loaded, &rep, a.out.format))
}

pub fn cmd_constant(a: &ConstantArgs) -> CliResult<()> {
    finite_nonneg(a.probe, "probe")?;
    let loaded = load_params(&a.manifold)?;
    let rep = sharp_constant(&loaded.params, a.probe).map_err(map_error)?;
    emit(&a.out, &render::constant(&loaded, &rep, a.out.format))
}

pub fn cmd_green(a: &GreenArgs) -> CliResult<()> {
    if let Some(s) = a.s.iter().find(|s| !s.is_finite()) {
        return Err(CliError::validation("s", format!("must be finite, got {s}")));
    }
    let loaded = load_params(&a.manifold)?;
    let p = &loaded.params;
    let f = parse_function(p, &read(&a.input, "input")?).map_err(|e| match e {
        Error::BudgetExceeded { .. } => map_error(e),
        e => CliError::validation("input", e),
    })?;
    let g = green_apply(p, &f);
    let rows = a
        .s
        .iter()
        .map(|&s| {
            let gain = sobolev_gain_check(p, &f, s).map_err(map_error)?;
            Ok(render::GreenRow {
                s,
                input_norm: sobolev_norm(p, &f, s),
                output_norm: sobolev_norm(p, &g, s),
                gain,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let l2 = (l2_norm(&f), l2_norm(&g));
    emit(&a.out, &render::green(&loaded, &g, l2, &rows, a.out.format))
}

/// Returns whether every invariant passed.
pub fn cmd_check(a: &CheckArgs) -> CliResult<bool> {
    let outcomes = check::run_suite(a.seed, a.sabotage);
    let body = render::check(a, &outcomes);
    write_to(a.output.as_deref(), &body)?;
    Ok(outcomes.iter().all(|o| o.passed))
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a).map(|_| 0),
        Command::Schatten(a) => cmd_schatten(a).map(|_| 0),
        Command::Constant(a) => cmd_constant(a).map(|_| 0),
        Command::Green(a) => cmd_green(a).map(|_| 0),
        Command::Check(a) => cmd_check(a).map(|ok| if ok { 0 } else { EXIT_CHECK_FAILED }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
