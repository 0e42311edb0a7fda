use std::collections::BTreeMap;
use std::fmt::Write as _;

use k3cert::certificate::{CertificateReport, Status, StepResult, Witness};
use k3cert::{intser, BigInt};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::FORMAT_VERSION;

/// Machine-readable report. Field set is fixed for a given `format_version`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDocument {
    pub format_version: String,
    pub verdict: String,
    pub steps: Vec<OutputStep>,
    pub derived: OutputDerived,
    pub notes: Vec<OutputNote>,
    /// Milliseconds per step; `null` unless timing was requested, so that
    /// default output is byte-stable.
    pub timing: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputStep {
    pub id: String,
    pub status: String,
    pub witness: Option<Value>,
    pub citation: String,
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDerived {
    #[serde(with = "intser")]
    pub det: BigInt,
    pub signature: String,
    #[serde(with = "intser::vec")]
    pub invariant_factors: Vec<BigInt>,
    pub disc_action_order: Option<u64>,
    pub char_poly: Option<String>,
    pub dominant_root: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputNote {
    pub topic: String,
    pub statement: String,
}

impl OutputDocument {
    pub fn from_report(report: &CertificateReport, timing: bool) -> Self {
        let steps = report
            .steps
            .iter()
            .map(|s| OutputStep {
                id: s.id.to_string(),
                status: s.status.to_string(),
                witness: s
                    .witness
                    .as_ref()
                    .map(|w| serde_json::to_value(w).expect("witnesses serialize")),
                citation: s.citation.to_owned(),
                details: s.details.clone(),
            })
            .collect();
        let d = &report.derived;
        OutputDocument {
            format_version: FORMAT_VERSION.to_owned(),
            verdict: report.verdict.to_string(),
            steps,
            derived: OutputDerived {
                det: d.det.clone(),
                signature: d.signature.clone(),
                invariant_factors: d.invariant_factors.clone(),
                disc_action_order: d.disc_action_order,
                char_poly: d.char_poly.clone(),
                dominant_root: d.dominant_root.clone(),
            },
            notes: report
                .notes
                .iter()
                .map(|n| OutputNote {
                    topic: n.topic.to_owned(),
                    statement: n.statement.to_owned(),
                })
                .collect(),
            timing: timing.then(|| {
                report
                    .steps
                    .iter()
                    .map(|s| {
                        let ms = (s.elapsed.as_secs_f64() * 1e6).round() / 1e3;
                        (s.id.to_string(), ms)
                    })
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Invariant { name, value } => format!("{name}: {value}"),
        Witness::Vector { class, norm } => format!("class {class} with square {norm}"),
        Witness::LowDegreeClass {
            class,
            degree,
            square,
        } => format!("class {class} of degree {degree} and square {square}, not a multiple of h"),
        Witness::Isometry { matrix, reason } => format!("{matrix} {reason}"),
    }
}

fn step_lines(out: &mut String, step: &StepResult, timing: bool) {
    let time = if timing {
        format!("  ({:.3} ms)", step.elapsed.as_secs_f64() * 1e3)
    } else {
        String::new()
    };
    let _ = writeln!(out, "{}  {:<7}  {}{}", step.id, step.status, step.title, time);
    if let Some(w) = &step.witness {
        let _ = writeln!(out, "    witness: {}", witness_text(w));
    }
    let d = &step.details;
    match step.id {
        k3cert::certificate::StepId::S4 if step.status != Status::Skipped => {
            for w in d["windows"].as_array().into_iter().flatten() {
                let _ = writeln!(
                    out,
                    "    degree {}: {}, C² = {}, classes: {}",
                    w["degree"], strip(&w["line"]), strip(&w["square"]), w["classes"]
                );
            }
        }
        k3cert::certificate::StepId::S5 if step.status != Status::Skipped => {
            if let Some(n) = d.get("disc_action_order") {
                let _ = writeln!(out, "    order on the discriminant group: {n}");
            }
            if let Some(claim) = d.get("root_claim") {
                let _ = writeln!(out, "    {}", strip(&claim["note"]));
            }
        }
        _ => {}
    }
}

fn strip(v: &Value) -> String {
    v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string())
}

/// Human-readable rendering; carries the same verdict string as the JSON.
pub fn render_text(report: &CertificateReport, timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verdict: {}", report.verdict);
    for step in &report.steps {
        step_lines(&mut out, step, timing);
    }
    let d = &report.derived;
    let _ = writeln!(out, "det {}, signature {}", d.det, d.signature);
    let factors: Vec<String> = d.invariant_factors.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "invariant factors [{}]", factors.join(", "));
    if let Some(cp) = &d.char_poly {
        let _ = writeln!(
            out,
            "characteristic polynomial {cp}, dominant root {}",
            d.dominant_root.as_deref().unwrap_or("none")
        );
    }
    out
}
