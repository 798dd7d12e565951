mod beck;
mod discrepancy;
mod riesz;
mod verify;

use std::fs::File;
use std::path::Path;

use anyhow::Context;
use hyperhaar::discrepancy::RHO_BITS;
use hyperhaar::scalar::{parse_rational, ratio, rational_to_text};
use hyperhaar::smallball::{dyadic_approximation, BlockMode, CoefficientField, RieszParams};
use hyperhaar::HyperHaarError;
use serde_json::{json, Value};

use crate::args::{BlocksArg, CoeffArg, Command, Common, Format, ModeArg, ParamArgs};
use crate::UsageError;

/// Grid-building subcommands refuse `n · d` above this many bits up front.
pub const GRID_BITS_LIMIT: u32 = 26;

/// Runs one subcommand; `Ok(false)` means the report was written but an invariant failed.
pub fn dispatch(command: &Command) -> anyhow::Result<bool> {
    match command {
        Command::Verify(a) => verify::run(a),
        Command::Riesz(a) => riesz::run(a),
        Command::Beckgain(a) => beck::run(a),
        Command::Discrepancy(a) => discrepancy::run(a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn check_capacity(p: &ParamArgs) -> anyhow::Result<()> {
    if p.d == 0 || p.n == 0 {
        return Err(usage("need --d ≥ 1 and --n ≥ 1"));
    }
    let bits = p.n as u64 * p.d as u64;
    if bits > GRID_BITS_LIMIT as u64 {
        return Err(HyperHaarError::Capacity { bits: bits as u32, limit: GRID_BITS_LIMIT }.into());
    }
    Ok(())
}

fn block_mode(b: BlocksArg) -> BlockMode {
    match b {
        BlocksArg::Partition => BlockMode::Partition,
        BlocksArg::Shifted => BlockMode::Shifted,
    }
}

/// Riesz parameters with the exact `ρ̃` stand-in attached.
fn resolve_params(p: &ParamArgs) -> anyhow::Result<RieszParams> {
    check_capacity(p)?;
    if p.q == Some(0) {
        return Err(usage("--q must be at least 1"));
    }
    let a = parse_rational(&p.a)?;
    let eps = match &p.eps {
        Some(e) => parse_rational(e)?,
        None => ratio(1, (p.d * p.d) as i64),
    };
    let params = RieszParams::with_constants(p.n, p.d, p.q, a, eps, block_mode(p.blocks))?;
    let rho = match &p.rho {
        Some(r) => parse_rational(r)?,
        None => dyadic_approximation(params.rho_tilde, RHO_BITS),
    };
    Ok(params.with_surrogate(rho))
}

fn load_coefficients(kind: CoeffArg, file: Option<&Path>, n: u32, d: usize, seed: u64) -> anyhow::Result<CoefficientField> {
    match kind {
        CoeffArg::Ones => Ok(CoefficientField::ones(n, d)),
        CoeffArg::Random => Ok(CoefficientField::random_signs(n, d, seed)),
        CoeffArg::File => {
            let path = file.ok_or_else(|| usage("--coeff file needs --coeff-file"))?;
            let reader = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Ok(CoefficientField::read_csv(reader, n, d)?)
        }
        CoeffArg::Exhaustive => Err(usage("--coeff exhaustive is only meaningful for verify")),
    }
}

fn coeff_name(c: CoeffArg) -> &'static str {
    match c {
        CoeffArg::Ones => "ones",
        CoeffArg::Random => "random",
        CoeffArg::File => "file",
        CoeffArg::Exhaustive => "exhaustive",
    }
}

fn mode_name(m: ModeArg) -> &'static str {
    match m {
        ModeArg::Exact => "exact",
        ModeArg::Float => "float",
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn path_json(p: Option<&Path>) -> Value {
    p.map(|p| json!(p.display().to_string())).unwrap_or(Value::Null)
}

/// The resolved configuration embedded in every report.
fn params_config(
    command: &str,
    params: &RieszParams,
    coeff: CoeffArg,
    coeff_file: Option<&Path>,
    common: &Common,
    format: Format,
) -> Value {
    json!({
        "subcommand": command,
        "d": params.d,
        "n": params.n,
        "q": params.q,
        "a": rational_to_text(&params.a),
        "eps": rational_to_text(&params.eps),
        // Float mode runs with the true ρ̃; the exact stand-in is irrelevant there.
        "rho_surrogate": match common.mode {
            ModeArg::Exact => json!(params.rho_surrogate.as_ref().map(rational_to_text)),
            ModeArg::Float => Value::Null,
        },
        "seed": common.seed,
        "mode": mode_name(common.mode),
        "coeff": coeff_name(coeff),
        "coeff_file": path_json(coeff_file),
        "blocks": params.block_mode.as_str(),
        "out": path_json(common.out.as_deref()),
        "format": format_name(format),
    })
}
