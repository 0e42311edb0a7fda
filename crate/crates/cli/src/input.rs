use std::path::Path;

use k3cert::certificate::{CertificateInput, DEFAULT_DEGREE_BOUND, DEFAULT_SEARCH_BOUND};
use k3cert::oracle::DEFAULT_BOX_RADIUS;
use k3cert::{intser, BigInt, GramLattice, IntMatrix, LatticeVector};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The on-disk lattice description. Integers only; unknown fields rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(with = "intser::rows")]
    pub gram: Vec<Vec<BigInt>>,
    #[serde(with = "intser::vec")]
    pub polarization: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rows")]
    pub isometry: Option<Vec<Vec<BigInt>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<u64>,
}

mod opt_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Rows(#[serde(with = "intser::rows")] Vec<Vec<BigInt>>);

    pub fn serialize<S: Serializer>(m: &Option<Vec<Vec<BigInt>>>, s: S) -> Result<S::Ok, S::Error> {
        m.clone().map(Rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<BigInt>>>, D::Error> {
        Ok(Option::<Rows>::deserialize(d)?.map(|r| r.0))
    }
}

impl InputDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Input {
                field: if path == "." { None } else { Some(path) },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("input documents always serialize")
    }

    pub fn degree_bound(&self) -> u64 {
        self.degree_bound.unwrap_or(DEFAULT_DEGREE_BOUND)
    }

    pub fn search_bound(&self) -> u64 {
        self.search_bound.unwrap_or(DEFAULT_SEARCH_BOUND)
    }

    pub fn box_radius(&self) -> u64 {
        self.box_radius.unwrap_or(DEFAULT_BOX_RADIUS)
    }

    pub fn lattice(&self) -> Result<GramLattice, CliError> {
        GramLattice::from_rows(self.gram.clone()).map_err(|e| field_error("gram", e))
    }

    pub fn polarization(&self) -> LatticeVector {
        LatticeVector::new(self.polarization.clone())
    }

    pub fn isometry_matrix(&self) -> Result<Option<IntMatrix>, CliError> {
        self.isometry
            .clone()
            .map(IntMatrix::new)
            .transpose()
            .map_err(|e| field_error("isometry", e))
    }

    /// Validates shapes and bounds and builds the certificate input.
    pub fn certificate_input(&self) -> Result<CertificateInput, CliError> {
        let gram = self.lattice()?;
        let iso = self.isometry_matrix()?;
        if let Some(m) = &iso {
            if m.nrows() != gram.rank() || m.ncols() != gram.rank() {
                return Err(CliError::Input {
                    field: Some("isometry".into()),
                    message: format!(
                        "expected a {0}x{0} matrix, found {1}x{2}",
                        gram.rank(),
                        m.nrows(),
                        m.ncols()
                    ),
                });
            }
        }
        if self.box_radius == Some(0) {
            return Err(CliError::Input {
                field: Some("box_radius".into()),
                message: "must be at least 1".into(),
            });
        }
        CertificateInput::new(gram, self.polarization(), iso)
            .map_err(|e| field_error("polarization", e))?
            .with_degree_bound(self.degree_bound())
            .map_err(|e| field_error("degree_bound", e))?
            .with_search_bound(self.search_bound())
            .map_err(|e| field_error("search_bound", e))
    }
}

fn field_error(field: &str, e: k3cert::Error) -> CliError {
    CliError::Input {
        field: Some(field.into()),
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUARTIC: &str = r#"{"gram": [[4, 20], [20, 4]], "polarization": [1, 0], "isometry": [[10, 1], [-1, 0]]}"#;

    #[test]
    fn parses_and_round_trips() {
        let doc = InputDocument::parse(QUARTIC).unwrap();
        assert_eq!(doc.degree_bound(), 16);
        assert_eq!(doc.search_bound(), 1000);
        assert_eq!(doc.box_radius(), 50);
        let again = InputDocument::parse(&doc.to_json()).unwrap();
        assert_eq!(again, doc);
        assert_eq!(again.to_json(), doc.to_json());
        assert!(doc.certificate_input().is_ok());
    }

    fn field_of(text: &str) -> Option<String> {
        match InputDocument::parse(text)
            .and_then(|d| d.certificate_input().map(|_| d))
            .unwrap_err()
        {
            CliError::Input { field, .. } => field,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        assert_eq!(
            field_of(r#"{"gram": [[4, 20], [20, 4.5]], "polarization": [1, 0]}"#).as_deref(),
            Some("gram[1][1]")
        );
        assert_eq!(
            field_of(r#"{"gram": [[4, 20], [20, 4]], "polarization": [1, 0], "colour": 3}"#).as_deref(),
            Some("colour")
        );
        assert_eq!(
            field_of(r#"{"gram": [[4, 20], [2, 4]], "polarization": [1, 0]}"#).as_deref(),
            Some("gram")
        );
        assert_eq!(
            field_of(r#"{"gram": [[4, 20], [20, 4]], "polarization": [1, 0, 0]}"#).as_deref(),
            Some("polarization")
        );
        assert_eq!(
            field_of(r#"{"gram": [[4, 20], [20, 4]], "polarization": [1, 0], "isometry": [[1]]}"#)
                .as_deref(),
            Some("isometry")
        );
        assert_eq!(
            field_of(r#"{"gram": [[4, 20], [20, 4]], "polarization": [1, 0], "degree_bound": -1}"#)
                .as_deref(),
            Some("degree_bound")
        );
        assert_eq!(field_of(r#"{"gram": [[4, 20], [20"#).as_deref(), Some("gram[1]"));
        assert_eq!(field_of(""), None);
    }

    #[test]
    fn huge_integers_are_exact() {
        let doc = InputDocument::parse(
            r#"{"gram": [[2, 123456789012345678901234567890], [123456789012345678901234567890, 2]], "polarization": [1, 0]}"#,
        )
        .unwrap();
        assert!(doc.to_json().contains("123456789012345678901234567890"));
    }
}
