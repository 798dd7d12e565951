use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dyadic::ShapeVector;
use crate::error::{HyperHaarError, Result};
use crate::field::grid::GridFunction;
use crate::scalar::{parse_rational, Mode, Scalar};

#[derive(Serialize, Deserialize)]
struct GridJson {
    resolution: Vec<u32>,
    mode: Mode,
    values: Vec<Value>,
}

impl<T: Scalar> GridFunction<T> {
    /// JSON `{resolution, mode, values}`; exact values are `"p/q"` strings, float values numbers.
    pub fn to_json(&self) -> Value {
        let values = self
            .values()
            .iter()
            .map(|v| match T::MODE {
                Mode::Exact => Value::String(v.to_text()),
                Mode::Float => serde_json::json!(v.to_f64()),
            })
            .collect();
        serde_json::to_value(GridJson {
            resolution: self.resolution().entries().to_vec(),
            mode: T::MODE,
            values,
        })
        .expect("grid serializes")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let parsed: GridJson = serde_json::from_value(value.clone())?;
        if parsed.mode != T::MODE {
            return Err(HyperHaarError::ModeMismatch(parsed.mode.as_str(), T::MODE.as_str()));
        }
        let values = parsed
            .values
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(T::from_rational(&parse_rational(s)?)),
                Value::Number(n) => match T::MODE {
                    Mode::Float => n
                        .as_f64()
                        .and_then(T::from_f64)
                        .ok_or_else(|| HyperHaarError::Parse(format!("bad number {n}"))),
                    Mode::Exact => Ok(T::from_rational(&parse_rational(&n.to_string())?)),
                },
                other => Err(HyperHaarError::Parse(format!("bad grid value {other}"))),
            })
            .collect::<Result<Vec<T>>>()?;
        Self::from_values(ShapeVector::new(parsed.resolution), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    #[test]
    fn exact_round_trip() {
        let g = GridFunction::from_values(ShapeVector::new(vec![1]), vec![ratio(1, 3), ratio(-2, 1)]).unwrap();
        let json = g.to_json();
        assert_eq!(json["values"][0], "1/3");
        assert_eq!(json["mode"], "exact");
        assert_eq!(GridFunction::<BigRational>::from_json(&json).unwrap(), g);
        assert!(matches!(GridFunction::<f64>::from_json(&json), Err(HyperHaarError::ModeMismatch(..))));
    }

    #[test]
    fn float_round_trip() {
        let g = GridFunction::from_values(ShapeVector::new(vec![0, 1]), vec![0.1f64, -2.5]).unwrap();
        assert_eq!(GridFunction::<f64>::from_json(&g.to_json()).unwrap(), g);
    }
}
