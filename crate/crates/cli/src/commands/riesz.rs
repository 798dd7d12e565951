use hyperhaar::graphs::inclusion_exclusion_psi_neg;
use hyperhaar::smallball::{psi_stats, AllPlus, CoefficientField, RandomSigns, RieszEngine, SignSource};
use hyperhaar::{HyperHaarError, Rational, Scalar};
use serde_json::{json, Map, Value};

use super::{load_coefficients, params_config, resolve_params, usage};
use crate::args::{CoeffArg, Format, ModeArg, RieszArgs};
use crate::report::{envelope, json_bytes, scalar_json, write_output};

const FLOAT_TOLERANCE: f64 = 1e-9;

pub fn run(args: &RieszArgs) -> anyhow::Result<bool> {
    let params = resolve_params(&args.params)?;
    let format = args.common.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return Err(usage("riesz reports are JSON only"));
    }
    let config = params_config("riesz", &params, args.coeff, args.coeff_file.as_deref(), &args.common, format);
    let file_coeffs: CoefficientField;
    let source: &dyn SignSource = match args.coeff {
        CoeffArg::Ones => &AllPlus,
        CoeffArg::Random => &RandomSigns { seed: args.common.seed },
        CoeffArg::File => {
            file_coeffs = load_coefficients(CoeffArg::File, args.coeff_file.as_deref(), params.n, params.d, 0)?;
            &file_coeffs
        }
        CoeffArg::Exhaustive => return Err(usage("--coeff exhaustive is only meaningful for verify")),
    };
    let engine = RieszEngine::new(&params, source)?;
    let (body, failures) = match args.common.mode {
        ModeArg::Exact => analyse::<Rational>(&engine, args.inject_fault)?,
        ModeArg::Float => analyse::<f64>(&engine, args.inject_fault)?,
    };
    let mut body = body;
    body.insert("params".into(), params.to_json());
    body.insert("failures".into(), json!(failures));
    write_output(args.common.out.as_deref(), &json_bytes(&envelope("riesz", config, body))?)?;
    for f in &failures {
        eprintln!("invariant failed: {f}");
    }
    Ok(failures.is_empty())
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    if T::is_exact() {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= FLOAT_TOLERANCE * (1.0 + b.to_f64().abs())
    }
}

fn analyse<T: Scalar>(engine: &RieszEngine, inject_fault: bool) -> anyhow::Result<(Map<String, Value>, Vec<String>)> {
    let mut dec = engine.decompose::<T>()?;
    if inject_fault {
        let v = &mut dec.neg.values_mut()[0];
        *v = v.clone() + T::one();
    }
    let stats = psi_stats(&dec.psi)?;
    let mut failures = Vec::new();
    if !close(&stats.mean, &T::one()) {
        failures.push("E Ψ ≠ 1".to_string());
    }
    if !stats.l1_consistent {
        failures.push("‖Ψ‖₁ disagrees with E Ψ − 2 E Ψ1_{Ψ<0}".to_string());
    }
    let sd = dec.sd()?;
    let mut identity_residual = T::zero();
    for ((p, s), g) in dec.psi.values().iter().zip(sd.values()).zip(dec.neg.values()) {
        let r = (p.clone() - T::one() - s.clone() - g.clone()).abs();
        if r > identity_residual {
            identity_residual = r;
        }
    }
    let identity_holds = close(&identity_residual, &T::zero());
    if !identity_holds {
        failures.push("Ψ ≠ 1 + Ψˢᵈ + Ψ¬".to_string());
    }
    let sd_means: Vec<T> = dec.sd_by_order.iter().map(|g| g.integral()).collect();
    if sd_means.iter().any(|m| !close(m, &T::zero())) {
        failures.push("some Ψˢᵈ_k has nonzero mean".to_string());
    }
    let neg_mean = dec.neg.integral();
    if !close(&neg_mean, &T::zero()) {
        failures.push("Ψ¬ has nonzero mean".to_string());
    }
    let inclusion_exclusion = match inclusion_exclusion_psi_neg::<T>(engine) {
        Ok(g) => {
            let matches = g.values().iter().zip(dec.neg.values()).all(|(a, b)| close(a, b));
            if !matches {
                failures.push("inclusion–exclusion differs from Ψ¬".to_string());
            }
            json!({ "status": if matches { "match" } else { "mismatch" } })
        }
        Err(e @ (HyperHaarError::Budget(_) | HyperHaarError::Capacity { .. })) => {
            json!({ "status": "skipped", "reason": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    let mut body = Map::new();
    body.insert(
        "psi".into(),
        json!({
            "mean": scalar_json(&stats.mean),
            "l1": scalar_json(&stats.l1),
            "l2_sq": scalar_json(&stats.l2_sq),
            "l2": stats.l2,
            "neg_measure": scalar_json(&stats.neg_measure),
            "min": scalar_json(&stats.min),
            "l1_consistent": stats.l1_consistent,
        }),
    );
    body.insert(
        "decomposition".into(),
        json!({
            "identity_holds": identity_holds,
            "identity_residual": scalar_json(&identity_residual),
            "sd_means": sd_means.iter().map(scalar_json).collect::<Vec<_>>(),
            "sd_l1": dec.sd_by_order.iter().map(|g| g.norm_lp_pow(1).map(|v| scalar_json(&v))).collect::<hyperhaar::Result<Vec<_>>>()?,
            "neg_mean": scalar_json(&neg_mean),
            "neg_l1": scalar_json(&dec.neg.norm_lp_pow(1)?),
            "inclusion_exclusion": inclusion_exclusion,
        }),
    );
    Ok((body, failures))
}
