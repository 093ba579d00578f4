//! Deterministic JSON/CSV emission.
//!
//! Every float in an emitted artifact is rounded to 12 significant digits
//! before printing, and all maps are ordered, so identical inputs produce
//! byte-identical output across runs and platforms.

use serde::Serialize;
use serde_json::Value;

use crate::engine::RunReport;
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};

/// Round to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Format with 12 significant digits, trimming trailing zeros; plain
/// decimal notation for moderate magnitudes, exponent form otherwise.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.11e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("numeric exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = digits.trim_end_matches('0');
    let digits = if trimmed.is_empty() { "0" } else { trimmed };
    let sign = if neg { "-" } else { "" };
    if (-4..12).contains(&exp) {
        let point = exp + 1; // digits before the decimal point
        let mut out = String::new();
        if point <= 0 {
            out.push_str("0.");
            for _ in 0..-point {
                out.push('0');
            }
            out.push_str(digits);
        } else if (point as usize) >= digits.len() {
            out.push_str(digits);
            for _ in 0..(point as usize - digits.len()) {
                out.push('0');
            }
        } else {
            out.push_str(&digits[..point as usize]);
            out.push('.');
            out.push_str(&digits[point as usize..]);
        }
        format!("{sign}{out}")
    } else {
        let mut m = digits.to_string();
        if m.len() > 1 {
            m.insert(1, '.');
        }
        format!("{sign}{m}e{exp}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if !n.is_i64() && !n.is_u64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig12(f)) {
                        *v = Value::Number(r);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serialize any value to pretty JSON with floats rounded to 12
/// significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| Error::structural(format!("serialization failed: {e}")))?;
    round_value(&mut v);
    serde_json::to_string_pretty(&v)
        .map_err(|e| Error::structural(format!("serialization failed: {e}")))
}

/// CSV field quoting for labels that may contain commas.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Ensemble export: layout, amplitudes, and the family manifest.
pub fn ensemble_to_json(e: &Ensemble) -> Result<String> {
    #[derive(Serialize)]
    struct AmpRow {
        index: Vec<u8>,
        re: f64,
        im: f64,
    }
    #[derive(Serialize)]
    struct MemberRow {
        label: String,
        family: String,
        amps: Vec<AmpRow>,
    }
    #[derive(Serialize)]
    struct EnsembleDoc<'a> {
        name: &'a str,
        dims: &'a [usize],
        layout: &'a crate::qstate::SystemLayout,
        members: Vec<MemberRow>,
        families: &'a std::collections::BTreeMap<String, Vec<String>>,
    }
    let doc = EnsembleDoc {
        name: &e.name,
        dims: &e.dims,
        layout: &e.layout,
        members: e
            .members
            .iter()
            .map(|m| MemberRow {
                label: m.label.to_string(),
                family: m.label.family.clone(),
                amps: m
                    .state
                    .amps()
                    .iter()
                    .map(|(idx, a)| AmpRow {
                        index: idx.0.clone(),
                        re: a.re,
                        im: a.im,
                    })
                    .collect(),
            })
            .collect(),
        families: &e.families,
    };
    to_json(&doc)
}

/// Summary table: member, path, probability, verdict, ebits.
pub fn report_to_csv(report: &RunReport, valuation: &crate::protocol::Valuation) -> String {
    let mut out = String::from("member,path,probability,verdict,ebits\n");
    for m in &report.members {
        for p in &m.paths {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&m.label),
                csv_field(&p.transcript.join("/")),
                fmt_sig12(p.probability),
                csv_field(&p.verdict),
                fmt_sig12(p.cost.ebit_total(valuation)),
            ));
        }
    }
    out
}
