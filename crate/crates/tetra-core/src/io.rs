//! Wire formats: complex numbers as two-element [re, im] arrays, matrices
//! as {"order": n, "data": [[re, im], ...]} in row-major order, point
//! clouds as CSV with 17-significant-digit floats so values round-trip
//! exactly.

use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::TetraPoint;
use crate::linalg::ComplexMatrix;
use crate::model::ModelTriple;
use crate::variety::VarietyPointCloud;
use crate::vn::parse_complex_str;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("bad matrix JSON: {0}")]
    BadMatrix(String),
    #[error("bad complex literal: {0}")]
    BadComplex(String),
    #[error("bad point literal (want three comma-separated complex numbers): {0}")]
    BadPoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    File(#[from] std::io::Error),
}

/// 17 significant digits: enough to reconstruct the exact f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value) -> Result<Complex64, IoError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| IoError::BadComplex(v.to_string()))?;
    let re = arr[0].as_f64().ok_or_else(|| IoError::BadComplex(v.to_string()))?;
    let im = arr[1].as_f64().ok_or_else(|| IoError::BadComplex(v.to_string()))?;
    Ok(Complex64::new(re, im))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    json!({
        "order": m.rows(),
        "data": m.data().iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>(),
    })
}

pub fn matrix_from_json(v: &Value) -> Result<ComplexMatrix, IoError> {
    let order = v
        .get("order")
        .and_then(Value::as_u64)
        .ok_or_else(|| IoError::BadMatrix("missing integer field 'order'".into()))?
        as usize;
    let data = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::BadMatrix("missing array field 'data'".into()))?;
    if data.len() != order * order {
        return Err(IoError::BadMatrix(format!(
            "expected {} entries for order {}, found {}",
            order * order,
            order,
            data.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(order, order);
    for (idx, entry) in data.iter().enumerate() {
        let pair = entry
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| IoError::BadMatrix(format!("entry {idx} is not a [re, im] pair")))?;
        let re = pair[0]
            .as_f64()
            .ok_or_else(|| IoError::BadMatrix(format!("entry {idx} re is not a number")))?;
        let im = pair[1]
            .as_f64()
            .ok_or_else(|| IoError::BadMatrix(format!("entry {idx} im is not a number")))?;
        m[(idx / order, idx % order)] = Complex64::new(re, im);
    }
    if !m.is_finite() {
        return Err(IoError::BadMatrix("matrix contains non-finite entries".into()));
    }
    Ok(m)
}

pub fn read_matrix(path: &std::path::Path) -> Result<ComplexMatrix, IoError> {
    let text = std::fs::read_to_string(path)?;
    matrix_from_json(&serde_json::from_str(&text)?)
}

pub fn write_matrix(path: &std::path::Path, m: &ComplexMatrix) -> Result<(), IoError> {
    std::fs::write(path, serde_json::to_string_pretty(&matrix_to_json(m))?)?;
    Ok(())
}

/// Parses "c" or "c,c,c" components with complex literals like 0.5+0.25i.
pub fn parse_point(s: &str) -> Result<TetraPoint, IoError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(IoError::BadPoint(s.into()));
    }
    let mut vals = [Complex64::new(0.0, 0.0); 3];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = parse_complex_str(part).ok_or_else(|| IoError::BadComplex((*part).into()))?;
    }
    Ok(TetraPoint::new(vals[0], vals[1], vals[2]))
}

pub const CLOUD_CSV_HEADER: &str = "x1_re,x1_im,x2_re,x2_im,x3_re,x3_im,residual,tag";

pub fn cloud_to_csv(cloud: &VarietyPointCloud) -> String {
    let mut out = String::from(CLOUD_CSV_HEADER);
    out.push('\n');
    for p in cloud.iter_points() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(p.x1.re),
            fmt_f64(p.x1.im),
            fmt_f64(p.x2.re),
            fmt_f64(p.x2.im),
            fmt_f64(p.x3.re),
            fmt_f64(p.x3.im),
            fmt_f64(p.residual),
            p.tag
        ));
    }
    out
}

pub fn cloud_to_json(cloud: &VarietyPointCloud) -> Value {
    json!({
        "points": cloud
            .iter_points()
            .map(|p| {
                json!({
                    "x1": complex_to_json(p.x1),
                    "x2": complex_to_json(p.x2),
                    "x3": complex_to_json(p.x3),
                    "residual": p.residual,
                    "tag": p.tag.as_str(),
                })
            })
            .collect::<Vec<_>>(),
        "failures": cloud
            .failures
            .iter()
            .map(|f| json!({ "x3": complex_to_json(f.x3), "message": f.message }))
            .collect::<Vec<_>>(),
    })
}

/// Model serialization with layout metadata.
pub fn model_to_json(mt: &ModelTriple) -> Value {
    json!({
        "fiber_dim": mt.space.fiber_dim,
        "modes": mt.space.modes,
        "layout": "mode-major",
        "hypothesis_residuals": {
            "commutator": mt.hypothesis_residuals.0,
            "selfcommutator_defect": mt.hypothesis_residuals.1,
        },
        "a1": matrix_to_json(&mt.a1),
        "a2": matrix_to_json(&mt.a2),
        "q1": matrix_to_json(&mt.q1),
        "q2": matrix_to_json(&mt.q2),
        "v": matrix_to_json(&mt.v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.1, -2.0), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(1.5e-13, 0.3), Complex64::new(-0.25, 0.0)],
        ]);
        let v = matrix_to_json(&m);
        let back = matrix_from_json(&v).unwrap();
        assert!(back.sub(&m).max_abs() == 0.0);
    }

    #[test]
    fn matrix_json_rejects_malformed() {
        assert!(matrix_from_json(&json!({"order": 2, "data": [[1.0, 0.0]]})).is_err());
        assert!(matrix_from_json(&json!({"data": []})).is_err());
        assert!(matrix_from_json(&json!({"order": 1, "data": [[1.0]]})).is_err());
    }

    #[test]
    fn point_parsing() {
        let p = parse_point("0.5+0.25i, -1, 0.3i").unwrap();
        assert!((p.x1 - Complex64::new(0.5, 0.25)).norm() < 1e-15);
        assert!((p.x2 - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((p.x3 - Complex64::new(0.0, 0.3)).norm() < 1e-15);
        assert!(parse_point("1,2").is_err());
        assert!(parse_point("a,b,c").is_err());
    }

    #[test]
    fn f64_formatting_roundtrips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, -7.25] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
