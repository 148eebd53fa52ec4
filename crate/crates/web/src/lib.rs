//! Browser bindings: a dimension table, zero-sum analysis and a
//! separating-invariant search, each returning a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use zp3_core::invariants::InvariantRing;
use zp3_core::separating::{self, Point, Separation};
use zp3_core::{zsum, GroupSpec, ModuleSpec, ZSequence};

fn ring(p: u32, module: &str) -> Result<InvariantRing, String> {
    let g = GroupSpec::new(p).map_err(|e| e.to_string())?;
    let m: ModuleSpec = module.parse().map_err(|e| format!("module: {e}"))?;
    InvariantRing::new(&g, &m).map_err(|e| e.to_string())
}

pub fn dims_json(p: u32, module: &str, max_degree: u32) -> Result<Value, String> {
    let r = ring(p, module)?;
    let rows: Vec<Value> = (0..=max_degree)
        .map(|d| {
            json!({
                "d": d,
                "dim_i": r.dim_i(d),
                "dim_r": r.dim_r(d),
                "oracle": r.burnside_dim(d),
            })
        })
        .collect();
    Ok(json!({ "p": p, "module": r.table().module.to_string(), "rows": rows }))
}

pub fn zsum_json(p: u32, seq: &str) -> Result<Value, String> {
    let s = ZSequence::parse(p, seq).map_err(|e| format!("sequence: {e}"))?;
    if s.len() > zsum::ENUMERATION_GUARD {
        return Err(format!("at most {} elements", zsum::ENUMERATION_GUARD));
    }
    let class = zsum::classify(&s).map_err(|e| e.to_string())?;
    let fact = zsum::factor_irreducible(&s).map_err(|e| e.to_string())?;
    Ok(json!({
        "sequence": s.to_string(),
        "zero_sum": class.zero_sum,
        "zero_sum_free": class.zero_sum_free,
        "irreducible": class.irreducible_zero_sum,
        "height": class.height,
        "sigma": zsum::sigma(&s),
        "factors": fact.factors.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "remainder": fact.remainder.to_string(),
        "lemma": zsum::lemma_easy_check(&s).ok(),
        "balandraud": zsum::balandraud_bound(&s),
        "freeze_smith": zsum::freeze_smith_bound(&s),
    }))
}

pub fn separate_json(p: u32, module: &str, v1: &str, v2: &str, dmax: u32) -> Result<Value, String> {
    let r = ring(p, module)?;
    let n = 3 * p;
    let a = Point::parse(n, v1).map_err(|e| format!("v1: {e}"))?;
    let b = Point::parse(n, v2).map_err(|e| format!("v2: {e}"))?;
    let cert = separating::separate_pair(&r, &a, &b, dmax).map_err(|e| e.to_string())?;
    let mut out = cert.to_json(&r);
    if let Separation::Separated { .. } = cert.verdict {
        out["checked"] = Value::from(cert.check(&r).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn to_js(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dims_table(p: u32, module: &str, max_degree: u32) -> Result<String, JsError> {
    to_js(dims_json(p, module, max_degree))
}

#[wasm_bindgen]
pub fn zsum_analyze(p: u32, seq: &str) -> Result<String, JsError> {
    to_js(zsum_json(p, seq))
}

#[wasm_bindgen]
pub fn separate(p: u32, module: &str, v1: &str, v2: &str, dmax: u32) -> Result<String, JsError> {
    to_js(separate_json(p, module, v1, v2, dmax))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_rows() {
        let v = dims_json(7, "V1", 4).unwrap();
        assert_eq!(v["rows"][3], json!({"d": 3, "dim_i": 1, "dim_r": 1, "oracle": 1}));
        assert!(dims_json(7, "V9", 3).is_err());
    }

    #[test]
    fn zsum_fields() {
        let v = zsum_json(7, "1,1,5").unwrap();
        assert_eq!((v["zero_sum"].as_bool(), v["irreducible"].as_bool(), v["height"].as_u64()), (Some(true), Some(true), Some(2)));
    }

    #[test]
    fn separation() {
        let v = separate_json(7, "U1+V1", "1,1,0,0", "w,1,0,0", 8).unwrap();
        assert_eq!(v["verdict"], "separated");
        assert_eq!(v["checked"], true);
        assert!(separate_json(7, "U1+V1", "1,1,0", "w,1,0,0", 8).is_err());
    }
}
