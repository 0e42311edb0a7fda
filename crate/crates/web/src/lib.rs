//! Browser bindings for the certificate checker. Every export takes the same
//! JSON lattice document the CLI reads and returns a JSON string.

use k3cert::certificate::enumerate_low_degree;
use k3cert::{intser, BigInt, LatticeVector};
use k3cert_cli::commands::{check_document, orbit_document, CheckArgs};
use k3cert_cli::{CliError, Format, InputDocument};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest box the value map will draw.
pub const MAX_MAP_RADIUS: u64 = 60;

/// Full certificate report, as `k3cert check --verify` prints it.
pub fn check_json(doc: &str, verify: bool) -> Result<String, String> {
    let doc = InputDocument::parse(doc).map_err(message)?;
    let args = CheckArgs {
        verify,
        ..CheckArgs::default()
    };
    check_document(&doc, &args).map(|o| o.stdout).map_err(message)
}

/// Degrees of σ^k h for k = 0..=k_max, as `k3cert orbit` prints them.
pub fn orbit_json(doc: &str, k_max: u64) -> Result<String, String> {
    let doc = InputDocument::parse(doc).map_err(message)?;
    orbit_document(&doc, k_max, Format::Json)
        .map(|o| o.stdout)
        .map_err(message)
}

/// Values of the form on the box [-r, r]² for a rank-2 lattice, row by row
/// (y from r down to -r), plus the low-degree classes to highlight.
pub fn value_map_json(doc: &str, radius: u64) -> Result<String, String> {
    let doc = InputDocument::parse(doc).map_err(message)?;
    let input = doc.certificate_input().map_err(message)?;
    let g = &input.gram;
    if g.rank() != 2 {
        return Err(format!("the value map needs rank 2, found rank {}", g.rank()));
    }
    if radius == 0 || radius > MAX_MAP_RADIUS {
        return Err(format!("radius must be between 1 and {MAX_MAP_RADIUS}"));
    }
    let r = radius as i64;
    let mut rows = Vec::with_capacity(2 * radius as usize + 1);
    for y in (-r..=r).rev() {
        let mut row = Vec::with_capacity(2 * radius as usize + 1);
        for x in -r..=r {
            let v = LatticeVector::new(vec![BigInt::from(x), BigInt::from(y)]);
            row.push(intser::to_value(&g.norm(&v).map_err(|e| e.to_string())?));
        }
        rows.push(row);
    }
    let classes = enumerate_low_degree(g, &input.polarization, input.degree_bound, 1)
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&json!({
        "radius": radius,
        "values": rows,
        "polarization": input.polarization,
        "low_degree": classes,
    }))
    .expect("values serialize"))
}

fn message(e: CliError) -> String {
    e.to_string()
}

#[wasm_bindgen]
pub fn check(doc: &str, verify: bool) -> Result<String, JsError> {
    check_json(doc, verify).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn orbit(doc: &str, k_max: u32) -> Result<String, JsError> {
    orbit_json(doc, k_max.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn value_map(doc: &str, radius: u32) -> Result<String, JsError> {
    value_map_json(doc, radius.into()).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const QUARTIC: &str = r#"{"gram": [[4, 20], [20, 4]], "polarization": [1, 0], "isometry": [[10, 1], [-1, 0]]}"#;

    #[test]
    fn check_matches_the_cli_report() {
        let v: Value = serde_json::from_str(&check_json(QUARTIC, true).unwrap()).unwrap();
        assert_eq!(v["verdict"], "pass");
        assert!(v["timing"].is_null());
        assert!(check_json("{}", false).unwrap_err().contains("gram"));
    }

    #[test]
    fn orbit_degrees() {
        let v: Value = serde_json::from_str(&orbit_json(QUARTIC, 2).unwrap()).unwrap();
        let degrees: Vec<String> = v["orbit"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["degree"].to_string())
            .collect();
        assert_eq!(degrees, ["4", "20", "196"]);
    }

    #[test]
    fn value_map_grid() {
        let v: Value = serde_json::from_str(&value_map_json(QUARTIC, 2).unwrap()).unwrap();
        let rows = v["values"].as_array().unwrap();
        assert_eq!(rows.len(), 5);
        // top-left is (-2, 2): 4·4 − 2·20·4 + 4·4
        assert_eq!(rows[0][0].to_string(), "-128");
        // centre is the origin
        assert_eq!(rows[2][2].to_string(), "0");
        assert_eq!(v["low_degree"].as_array().unwrap().len(), 3);
        assert!(value_map_json(QUARTIC, 0).is_err());
        assert!(value_map_json(QUARTIC, MAX_MAP_RADIUS + 1).is_err());
        let rank3 = r#"{"gram": [[2,0,0],[0,2,0],[0,0,2]], "polarization": [1,0,0]}"#;
        assert!(value_map_json(rank3, 1).unwrap_err().contains("rank 2"));
    }
}
