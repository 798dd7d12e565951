use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use hyperhaar::Scalar;
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "1";

/// A scalar as JSON: exact values as `"p/q"` text, floats as numbers.
pub fn scalar_json<T: Scalar>(x: &T) -> Value {
    if T::is_exact() {
        Value::String(x.to_text())
    } else {
        json!(x.to_f64())
    }
}

/// Wraps a report body with the schema tag, library version and resolved config.
pub fn envelope(command: &str, config: Value, body: Map<String, Value>) -> Value {
    let mut root = Map::new();
    root.insert("schema".into(), json!(SCHEMA));
    root.insert("version".into(), json!(hyperhaar::VERSION));
    root.insert("command".into(), json!(command));
    root.insert("config".into(), config);
    root.extend(body);
    Value::Object(root)
}

pub fn write_output(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn json_bytes(v: &Value) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}
