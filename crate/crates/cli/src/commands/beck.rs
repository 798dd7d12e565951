use std::path::PathBuf;

use hyperhaar::graphs::{beck_gain_experiment, BeckEngine, BeckGainConfig, BeckGainReport};
use hyperhaar::scalar::rational_to_text;
use serde_json::{json, Map, Value};

use super::{format_name, mode_name, path_json, usage};
use crate::args::{BeckArgs, EngineArg, Format};
use crate::report::{envelope, json_bytes, write_output};

/// A slope needs at least this many sizes.
pub const MIN_ROWS: usize = 3;

pub fn run(args: &BeckArgs) -> anyhow::Result<bool> {
    let ns: Vec<u32> = match &args.ns {
        Some(ns) => ns.clone(),
        None => (4..=args.n).step_by(2).collect(),
    };
    if ns.len() < MIN_ROWS {
        return Err(usage(format!("need at least {MIN_ROWS} values of n, got {ns:?}")));
    }
    if args.d < 3 {
        return Err(usage("coincidences need d ≥ 3"));
    }
    let engine = match args.engine {
        EngineArg::Walsh => BeckEngine::Walsh,
        EngineArg::Grid => BeckEngine::Grid { seed: args.common.seed },
    };
    let cfg = BeckGainConfig { d: args.d, ns: ns.clone(), ps: args.ps.clone(), engine, pinned: args.pinned };
    let report = beck_gain_experiment(&cfg)?;
    let format = args.common.format.unwrap_or(Format::Csv);
    let config = json!({
        "subcommand": "beckgain",
        "d": args.d,
        "ns": ns,
        "ps": args.ps,
        "engine": match args.engine { EngineArg::Walsh => "walsh", EngineArg::Grid => "grid" },
        "pinned": args.pinned,
        "seed": args.common.seed,
        "mode": mode_name(args.common.mode),
        "blocks": "partition",
        "q": 2,
        "out": path_json(args.common.out.as_deref()),
        "format": format_name(format),
    });
    let meta = envelope("beckgain", config, summary(&report));
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            write_output(args.common.out.as_deref(), &buf)?;
            // CSV has no room for the config, so it goes next to the table.
            if let Some(out) = &args.common.out {
                let mut side = out.clone().into_os_string();
                side.push(".meta.json");
                write_output(Some(&PathBuf::from(side)), &json_bytes(&meta)?)?;
            }
        }
        Format::Json => {
            let mut meta = meta;
            meta["rows"] = Value::Array(report.rows.iter().map(row_json).collect());
            write_output(args.common.out.as_deref(), &json_bytes(&meta)?)?;
        }
    }
    Ok(true)
}

fn summary(report: &BeckGainReport) -> Map<String, Value> {
    let mut body = Map::new();
    let slopes: Vec<Value> = report
        .slopes
        .iter()
        .map(|&(p, s)| {
            let free = report.free_slope(p);
            json!({ "p": p, "slope": s, "free_slope": free, "gap": free.map(|f| f - s) })
        })
        .collect();
    body.insert("slopes".into(), Value::Array(slopes));
    body
}

fn row_json(r: &hyperhaar::graphs::BeckRow) -> Value {
    json!({
        "d": r.d,
        "n": r.n,
        "p": r.p,
        "norm_pow": rational_to_text(&r.norm_pow),
        "norm": r.norm,
        "free_norm": r.free_norm,
        "pinned_norm": r.pinned_norm,
        "unpinned_norm": r.unpinned_norm,
    })
}
