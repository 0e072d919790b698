//! JSON state files: `labels`, `dims`, `kind` and `data` as `[re, im]` pairs.

use super::{CMat, CVec, DensityOperator, RegisterLayout, StateVector, C64};
use crate::error::{QsrError, Result};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Pure(StateVector),
    Density(DensityOperator),
}

impl StateFile {
    pub fn layout(&self) -> &RegisterLayout {
        match self {
            StateFile::Pure(s) => s.layout(),
            StateFile::Density(d) => d.layout(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            StateFile::Pure(s) => s.to_density(),
            StateFile::Density(d) => d.clone(),
        }
    }
}

pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0"
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

fn write_doc(layout: &RegisterLayout, kind: &str, data: &[C64]) -> String {
    let labels = serde_json::to_string(&layout.labels()).expect("labels serialize");
    let dims = serde_json::to_string(&layout.dims()).expect("dims serialize");
    let pairs: Vec<String> = data.iter().map(|z| format!("[{}, {}]", fmt17(z.re), fmt17(z.im))).collect();
    format!(
        "{{\n  \"labels\": {labels},\n  \"dims\": {dims},\n  \"kind\": \"{kind}\",\n  \"data\": [\n    {}\n  ]\n}}\n",
        pairs.join(",\n    ")
    )
}

pub fn to_json(state: &StateFile) -> String {
    match state {
        StateFile::Pure(s) => write_doc(s.layout(), "pure", s.amplitudes().as_slice()),
        StateFile::Density(d) => {
            let m = d.matrix();
            let row_major: Vec<C64> = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
            write_doc(d.layout(), "density", &row_major)
        }
    }
}

fn schema(field: &str, msg: impl Into<String>) -> QsrError {
    QsrError::Schema { field: field.to_string(), msg: msg.into() }
}

pub fn from_json(text: &str) -> Result<StateFile> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("<document>", e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| schema("<document>", "expected an object"))?;
    let labels: Vec<String> = obj
        .get("labels")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("labels", "missing or not an array"))?
        .iter()
        .map(|x| x.as_str().map(str::to_string).ok_or_else(|| schema("labels", "entries must be strings")))
        .collect::<Result<_>>()?;
    let dims: Vec<usize> = obj
        .get("dims")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("dims", "missing or not an array"))?
        .iter()
        .map(|x| x.as_u64().map(|d| d as usize).ok_or_else(|| schema("dims", "entries must be positive integers")))
        .collect::<Result<_>>()?;
    if labels.len() != dims.len() {
        return Err(schema("dims", format!("length {} differs from labels length {}", dims.len(), labels.len())));
    }
    let layout = RegisterLayout::new(labels.into_iter().zip(dims)).map_err(|e| schema("labels", e.to_string()))?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| schema("kind", "missing or not a string"))?;
    let data = obj.get("data").and_then(Value::as_array).ok_or_else(|| schema("data", "missing or not an array"))?;
    let nums: Vec<C64> = data
        .iter()
        .map(|p| {
            let a = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema("data", "entries must be [re, im] pairs"))?;
            let re = a[0].as_f64().ok_or_else(|| schema("data", "non-numeric entry"))?;
            let im = a[1].as_f64().ok_or_else(|| schema("data", "non-numeric entry"))?;
            Ok(C64::new(re, im))
        })
        .collect::<Result<_>>()?;
    let d = layout.total_dim();
    match kind {
        "pure" => {
            if nums.len() != d {
                return Err(schema("data", format!("expected {d} amplitudes, found {}", nums.len())));
            }
            Ok(StateFile::Pure(StateVector::new(layout, CVec::from_vec(nums))?))
        }
        "density" => {
            if nums.len() != d * d {
                return Err(schema("data", format!("expected {} entries, found {}", d * d, nums.len())));
            }
            Ok(StateFile::Density(DensityOperator::new(layout, CMat::from_row_slice(d, d, &nums))?))
        }
        other => Err(schema("kind", format!("expected \"pure\" or \"density\", found {other:?}"))),
    }
}

pub fn read_state(path: &std::path::Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path).map_err(|e| schema("<file>", format!("{}: {e}", path.display())))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_vector, random_density_matrix, rng_from_seed};

    #[test]
    fn round_trip_is_lossless() {
        let mut rng = rng_from_seed(7);
        let l = RegisterLayout::new([("R", 2), ("C", 3)]).unwrap();
        let s = StateFile::Pure(StateVector::new(l.clone(), haar_vector(6, &mut rng)).unwrap());
        assert_eq!(from_json(&to_json(&s)).unwrap(), s);
        let d = StateFile::Density(DensityOperator::new(l, random_density_matrix(6, &mut rng)).unwrap());
        assert_eq!(from_json(&to_json(&d)).unwrap(), d);
    }

    #[test]
    fn schema_errors_name_field() {
        let e = from_json(r#"{"labels":["A"],"dims":[2],"kind":"pure","data":[[1,0]]}"#).unwrap_err();
        assert!(matches!(e, QsrError::Schema { ref field, .. } if field == "data"));
        let e = from_json(r#"{"labels":["A"],"dims":[2],"kind":"mixed","data":[]}"#).unwrap_err();
        assert!(matches!(e, QsrError::Schema { ref field, .. } if field == "kind"));
        let e = from_json(r#"{"labels":["A"],"dims":[2],"kind":"pure","data":[[1,0],[1,0]]}"#).unwrap_err();
        assert!(matches!(e, QsrError::Invariant { .. }));
    }
}
