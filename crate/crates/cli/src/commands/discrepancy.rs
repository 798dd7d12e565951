use std::fs::File;

use anyhow::Context;
use hyperhaar::discrepancy::{
    discrepancy_certificate, generate, roth_l2_lower, sampled_sup, scale_for, PointKind, PointSet,
};
use hyperhaar::scalar::{parse_rational, rational_to_text};
use hyperhaar::smallball::{BlockMode, RieszParams};
use hyperhaar::{HyperHaarError, Scalar};
use serde_json::{json, Map};

use super::{format_name, mode_name, path_json, usage, GRID_BITS_LIMIT};
use crate::args::{DiscrepancyArgs, Format, ModeArg, PointsArg};
use crate::report::{envelope, json_bytes, write_output};

fn point_kind(p: PointsArg) -> PointKind {
    match p {
        PointsArg::Vdc => PointKind::VanDerCorput,
        PointsArg::Hammersley => PointKind::Hammersley,
        PointsArg::Random => PointKind::Random,
        PointsArg::Grid => PointKind::Grid,
        PointsArg::File => PointKind::File,
    }
}

fn load_points(args: &DiscrepancyArgs) -> anyhow::Result<PointSet> {
    if args.points == PointsArg::File {
        let path = args.points_file.as_deref().ok_or_else(|| usage("--points file needs --points-file"))?;
        let reader = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        return Ok(PointSet::read_csv(reader)?);
    }
    let n_points = args.n_points.ok_or_else(|| usage("generated point sets need --n-points"))?;
    Ok(generate(point_kind(args.points), n_points, args.d, args.common.seed)?)
}

pub fn run(args: &DiscrepancyArgs) -> anyhow::Result<bool> {
    let format = args.common.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return Err(usage("discrepancy reports are JSON only"));
    }
    if args.common.mode == ModeArg::Float {
        return Err(usage("the discrepancy certificate is exact; use --mode exact"));
    }
    let set = load_points(args)?;
    if let Some(path) = &args.emit_points {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        set.write_csv(file)?;
    }
    let d = set.d();
    let n = scale_for(set.len());
    let bits = n as u64 * d as u64;
    if bits > GRID_BITS_LIMIT as u64 {
        return Err(HyperHaarError::Capacity { bits: bits as u32, limit: GRID_BITS_LIMIT }.into());
    }
    let mut params = RieszParams::new(n, d, Some(args.q), BlockMode::Shifted)?;
    if let Some(r) = &args.rho {
        params = params.with_surrogate(parse_rational(r)?);
    }
    let certificate = discrepancy_certificate(&set, &params)?;
    let roth = roth_l2_lower(&set, n)?;
    let mut failures = Vec::new();
    if roth.value < 0.0 || roth.value.is_nan() {
        failures.push("Roth bound is negative".to_string());
    }
    let sampled = if args.samples > 0 {
        let s = sampled_sup(&set, args.samples, args.common.seed)?;
        if certificate.lower_bound > s.value {
            failures.push("certificate exceeds the sampled sup".to_string());
        }
        json!({
            "samples": s.samples,
            "value": rational_to_text(&s.value),
            "value_float": s.value.to_f64(),
            "at": s.at.iter().map(rational_to_text).collect::<Vec<_>>(),
        })
    } else {
        serde_json::Value::Null
    };
    let config = json!({
        "subcommand": "discrepancy",
        "points": set.kind().as_str(),
        "points_file": path_json(args.points_file.as_deref()),
        "N": set.len(),
        "d": d,
        "n": n,
        "q": params.q,
        "blocks": params.block_mode.as_str(),
        "rho_surrogate": params.rho_surrogate.as_ref().map(rational_to_text),
        "samples": args.samples,
        "seed": args.common.seed,
        "mode": mode_name(args.common.mode),
        "out": path_json(args.common.out.as_deref()),
        "format": format_name(format),
    });
    let mut body = Map::new();
    body.insert("params".into(), params.to_json());
    body.insert("certificate".into(), certificate.to_json());
    body.insert(
        "roth".into(),
        json!({ "n": roth.n, "sum_sq": rational_to_text(&roth.sum_sq), "roth_l2": roth.value }),
    );
    body.insert("sampled_sup".into(), sampled);
    body.insert("failures".into(), json!(failures));
    write_output(args.common.out.as_deref(), &json_bytes(&envelope("discrepancy", config, body))?)?;
    for f in &failures {
        eprintln!("invariant failed: {f}");
    }
    Ok(failures.is_empty())
}
