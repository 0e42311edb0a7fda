use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use k3cert::certificate::{
    enumerate_low_degree, qualifying_automorph, run_certificate_with, RunOptions, Status,
};
use k3cert::discgroup::{action_order, default_cap, disc_quadratic_value, discriminant_group};
use k3cert::isometry::{polarization_orbit, IsometryMatrix};
use k3cert::oracle::{brute_low_degree, required_low_degree_radius};
use k3cert::quadform::pell_fundamental;
use k3cert::{intser, BigInt};
use serde_json::{json, Value};

use crate::input::InputDocument;
use crate::output::{render_text, OutputDocument};
use crate::{CliError, Format, EXIT_FAIL, EXIT_PASS, EXIT_UNKNOWN, FORMAT_VERSION};

/// What a subcommand prints and how the process should exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub exit: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            exit: EXIT_PASS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckArgs {
    pub verify: bool,
    pub format: Format,
    pub degree_bound: Option<u64>,
    pub jobs: usize,
    pub timing: bool,
}

impl Default for CheckArgs {
    fn default() -> Self {
        CheckArgs {
            verify: false,
            format: Format::Json,
            degree_bound: None,
            jobs: 1,
            timing: false,
        }
    }
}

pub fn check(path: &Path, args: &CheckArgs) -> Result<Outcome, CliError> {
    check_document(&InputDocument::read(path)?, args)
}

pub fn check_document(doc: &InputDocument, args: &CheckArgs) -> Result<Outcome, CliError> {
    let mut input = doc.certificate_input()?;
    if let Some(b) = args.degree_bound {
        input = input.with_degree_bound(b)?;
    }
    let options = RunOptions {
        verify: args.verify,
        box_radius: doc.box_radius(),
        jobs: args.jobs.max(1),
    };
    let report = run_certificate_with(&input, &options);
    let stdout = match args.format {
        Format::Json => OutputDocument::from_report(&report, args.timing).to_json() + "\n",
        Format::Text => render_text(&report, args.timing),
    };
    let exit = match report.verdict {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        _ => EXIT_UNKNOWN,
    };
    Ok(Outcome { stdout, exit })
}

fn json_out(mut v: Value) -> String {
    if let Value::Object(map) = &mut v {
        map.insert("format_version".into(), json!(FORMAT_VERSION));
    }
    serde_json::to_string_pretty(&v).expect("values serialize") + "\n"
}

pub fn pell(d: &str, format: Format) -> Result<Outcome, CliError> {
    let d = BigInt::from_str(d.trim()).map_err(|_| CliError::Input {
        field: Some("D".into()),
        message: format!("expected an integer, found {d:?}"),
    })?;
    let s = pell_fundamental(&d)?;
    Ok(Outcome::ok(match format {
        Format::Json => json_out(json!({
            "d": intser::to_value(&s.d),
            "x": intser::to_value(&s.x),
            "y": intser::to_value(&s.y),
        })),
        Format::Text => format!("{s}\n"),
    }))
}

pub fn disc(path: &Path, format: Format) -> Result<Outcome, CliError> {
    disc_document(&InputDocument::read(path)?, format)
}

pub fn disc_document(doc: &InputDocument, format: Format) -> Result<Outcome, CliError> {
    let g = doc.lattice()?;
    let group = discriminant_group(&g);
    let values: Vec<String> = if g.is_even() {
        group
            .generators
            .iter()
            .map(|w| disc_quadratic_value(&g, w).map(|q| q.to_string()))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let action = match doc.isometry_matrix()? {
        Some(m) => {
            let a = group.induced_action(&m)?;
            Some((a.clone(), action_order(&a, default_cap(&group))))
        }
        None => None,
    };
    Ok(Outcome::ok(match format {
        Format::Json => json_out(json!({
            "invariant_factors": group.invariant_factors.iter().map(intser::to_value).collect::<Vec<_>>(),
            "order": intser::to_value(&group.order()),
            "generators": json!(group)["generators"],
            "quadratic_values": values,
            "isometry_action": action.as_ref().map(|(a, n)| json!({
                "matrix": a,
                "order": n.value(),
            })),
        })),
        Format::Text => {
            let mut out = String::new();
            let factors: Vec<String> =
                group.invariant_factors.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "invariant factors [{}]", factors.join(", "));
            let _ = writeln!(out, "order {}", group.order());
            if !values.is_empty() {
                let _ = writeln!(out, "q on generators [{}]", values.join(", "));
            }
            if let Some((a, n)) = &action {
                let _ = writeln!(out, "isometry acts as {a}");
                match n.value() {
                    Some(n) => {
                        let _ = writeln!(out, "action order {n}");
                    }
                    None => out.push_str("action order exceeds the cap\n"),
                }
            }
            out
        }
    }))
}

pub fn orbit(path: &Path, k_max: u64, format: Format) -> Result<Outcome, CliError> {
    orbit_document(&InputDocument::read(path)?, k_max, format)
}

pub fn orbit_document(doc: &InputDocument, k_max: u64, format: Format) -> Result<Outcome, CliError> {
    let g = doc.lattice()?;
    let h = doc.polarization();
    let m = match doc.isometry_matrix()? {
        Some(m) => IsometryMatrix::new(&g, m)?,
        None => qualifying_automorph(&g, &h)?.ok_or_else(|| CliError::Input {
            field: Some("isometry".into()),
            message: "absent, and no automorph of the lattice qualifies".into(),
        })?,
    };
    let points = polarization_orbit(&g, &m, &h, k_max)?;
    Ok(Outcome::ok(match format {
        Format::Json => json_out(json!({ "isometry": m.matrix(), "orbit": points })),
        Format::Text => {
            let mut out = format!("isometry {}\n", m.matrix());
            for p in &points {
                let _ = writeln!(out, "k={}  {}  degree {}", p.k, p.class, p.degree);
            }
            out
        }
    }))
}

pub fn enumerate(path: &Path, bound: Option<u64>, format: Format) -> Result<Outcome, CliError> {
    enumerate_document(&InputDocument::read(path)?, bound, format)
}

/// Low-degree classes from the window enumeration, cross-checked against an
/// exhaustive box scan.
pub fn enumerate_document(
    doc: &InputDocument,
    bound: Option<u64>,
    format: Format,
) -> Result<Outcome, CliError> {
    let g = doc.lattice()?;
    let h = doc.polarization();
    let bound = bound.unwrap_or_else(|| doc.degree_bound());
    let classes = enumerate_low_degree(&g, &h, bound, 1)?;
    let radius = required_low_degree_radius(&g, &h, bound)?;
    let agrees = brute_low_degree(&g, &h, bound, radius)? == classes;
    Ok(Outcome::ok(match format {
        Format::Json => json_out(json!({
            "degree_bound": bound,
            "box_radius": radius,
            "oracle_agrees": agrees,
            "classes": classes,
        })),
        Format::Text => {
            let mut out = String::new();
            for c in &classes {
                let multiple = match &c.multiple_of_h {
                    Some(k) => format!("{k}·h"),
                    None => "not in Z·h".into(),
                };
                let _ = writeln!(
                    out,
                    "{}  degree {}  square {}  {}",
                    c.class, c.degree, c.square, multiple
                );
            }
            let _ = writeln!(
                out,
                "{} classes below degree {bound}; box oracle at radius {radius} {}",
                classes.len(),
                if agrees { "agrees" } else { "DISAGREES" }
            );
            out
        }
    }))
}
