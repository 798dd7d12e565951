use hyperhaar::scalar::rational_to_text;
use hyperhaar::smallball::{
    duality_certificate, exhaustive_min_ratio, hyperbolic_sup, verify_all, CoefficientField, DualityCertificate,
    InequalityRecord, RieszParams,
};
use hyperhaar::{Rational, Scalar};
use num_traits::Signed;
use serde_json::{json, Map, Value};

use super::{load_coefficients, params_config, resolve_params};
use crate::args::{CoeffArg, Format, ModeArg, VerifyArgs};
use crate::report::{envelope, json_bytes, scalar_json, write_output};

pub fn run(args: &VerifyArgs) -> anyhow::Result<bool> {
    let params = resolve_params(&args.params)?;
    let format = args.common.format.unwrap_or(Format::Json);
    let config = params_config("verify", &params, args.coeff, args.coeff_file.as_deref(), &args.common, format);
    if args.coeff == CoeffArg::Exhaustive {
        return exhaustive(&params, config, format, args);
    }
    let coeffs = load_coefficients(args.coeff, args.coeff_file.as_deref(), params.n, params.d, args.common.seed)?;
    let records = verify_all(&coeffs, params.eps.to_f64())?;
    let norm_inf = records.first().map(|r| r.norm_inf.clone()).unwrap_or_else(|| hyperbolic_sup(&coeffs, true).unwrap());
    let mut failures = Vec::new();
    if records.iter().any(|r| r.holds == Some(false)) {
        failures.push("average form violated".to_string());
    }
    let certificate = match args.common.mode {
        ModeArg::Exact => certificate_json::<Rational>(&coeffs, &params, &norm_inf, &mut failures)?,
        ModeArg::Float => certificate_json::<f64>(&coeffs, &params, &norm_inf, &mut failures)?,
    };
    let bytes = match format {
        Format::Json => {
            let mut body = Map::new();
            body.insert("params".into(), params.to_json());
            body.insert("lhs".into(), json!(records.first().map(|r| rational_to_text(&r.lhs))));
            body.insert("norm_inf".into(), json!(rational_to_text(&norm_inf)));
            body.insert("forms".into(), Value::Array(records.iter().map(record_json).collect()));
            body.insert("certificate".into(), certificate);
            body.insert("failures".into(), json!(failures));
            json_bytes(&envelope("verify", config, body))?
        }
        Format::Csv => forms_csv(&records)?,
    };
    write_output(args.common.out.as_deref(), &bytes)?;
    for f in &failures {
        eprintln!("invariant failed: {f}");
    }
    Ok(failures.is_empty())
}

fn record_json(r: &InequalityRecord) -> Value {
    json!({
        "form": r.form.as_str(),
        "lhs": rational_to_text(&r.lhs),
        "exponent": r.exponent,
        "rhs": r.rhs,
        "ratio": r.ratio,
        "holds": r.holds,
    })
}

fn forms_csv(records: &[InequalityRecord]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["form", "lhs", "norm_inf", "exponent", "rhs", "ratio", "holds"])?;
    for r in records {
        w.write_record([
            r.form.as_str().to_string(),
            rational_to_text(&r.lhs),
            rational_to_text(&r.norm_inf),
            format!("{:.12e}", r.exponent),
            format!("{:.12e}", r.rhs),
            format!("{:.12e}", r.ratio),
            r.holds.map(|h| h.to_string()).unwrap_or_default(),
        ])?;
    }
    Ok(w.into_inner()?)
}

fn certificate_json<T: Scalar>(
    coeffs: &CoefficientField,
    params: &RieszParams,
    norm_inf: &Rational,
    failures: &mut Vec<String>,
) -> anyhow::Result<Value> {
    let c: DualityCertificate<T> = duality_certificate(coeffs, params)?;
    if !c.first_order_matches {
        failures.push("first-order pairing differs from ρ̃ 2^-n · covered mass".into());
    }
    if !c.higher_orders_vanish {
        failures.push("higher-order pairings do not vanish".into());
    }
    let bound_ok = if T::is_exact() {
        c.lower_bound.to_rational().abs() <= *norm_inf
    } else {
        c.lower_bound.to_f64().abs() <= norm_inf.to_f64() * (1.0 + 1e-12)
    };
    if !bound_ok {
        failures.push("certificate exceeds the sup norm".into());
    }
    Ok(json!({
        "pairing": scalar_json(&c.pairing),
        "pairing_by_order": c.pairing_by_order.iter().map(scalar_json).collect::<Vec<_>>(),
        "l1": scalar_json(&c.l1),
        "lower_bound": scalar_json(&c.lower_bound),
        "lower_bound_float": c.lower_bound.to_f64(),
        "covered_mass": rational_to_text(&c.covered_mass),
        "full_mass": rational_to_text(&c.full_mass),
        "expected_first_order": scalar_json(&c.expected_first_order),
        "first_order_matches": c.first_order_matches,
        "higher_orders_vanish": c.higher_orders_vanish,
        "bound_below_sup": bound_ok,
    }))
}

fn exhaustive(params: &RieszParams, config: Value, format: Format, args: &VerifyArgs) -> anyhow::Result<bool> {
    let (min_ratio, min_sup) = exhaustive_min_ratio(params.n, params.d)?;
    let rectangles = CoefficientField::ones(params.n, params.d).nonzero().len();
    let positive = min_ratio > Rational::from_integer(0.into());
    let bytes = match format {
        Format::Json => {
            let mut body = Map::new();
            body.insert(
                "exhaustive".into(),
                json!({
                    "rectangles": rectangles,
                    "patterns": 1u64 << rectangles,
                    "min_sup": rational_to_text(&min_sup),
                    "min_ratio": rational_to_text(&min_ratio),
                    "min_ratio_float": min_ratio.to_f64(),
                }),
            );
            json_bytes(&envelope("verify", config, body))?
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["d", "n", "rectangles", "patterns", "min_sup", "min_ratio"])?;
            w.write_record([
                params.d.to_string(),
                params.n.to_string(),
                rectangles.to_string(),
                (1u64 << rectangles).to_string(),
                rational_to_text(&min_sup),
                rational_to_text(&min_ratio),
            ])?;
            w.into_inner()?
        }
    };
    write_output(args.common.out.as_deref(), &bytes)?;
    Ok(positive)
}
