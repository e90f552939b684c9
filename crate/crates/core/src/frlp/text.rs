//! Plain-text LP rendering.
//!
//! ```text
//! model <unweighted|weighted> <kmax> <ellmax>
//! vars gamma a(0,0) a(0,1) ... b(0,0) ...
//! maximize gamma
//! <tag>: <coef>*<var> + <coef>*<var> ... <= | = | >= <rhs>
//! ```
//!
//! Coefficients use the scalar's own `Display` form, so `f64` and exact
//! rationals both round-trip.

use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::model::{LpModel, Row, Sense, Var, Variant};

pub fn export_lp_text<S: Scalar + Display>(model: &LpModel<S>) -> String {
    let variant = match model.variant {
        Variant::Unweighted => "unweighted",
        Variant::Weighted => "weighted",
    };
    let mut out = format!("model {variant} {} {}\n", model.top.0, model.top.1);
    let names: Vec<String> = model.vars().iter().map(ToString::to_string).collect();
    out.push_str(&format!("vars {}\nmaximize gamma\n", names.join(" ")));
    for row in model.rows() {
        let terms: Vec<String> = row.coeffs.iter().map(|(j, c)| format!("{c}*{}", names[*j])).collect();
        out.push_str(&format!("{}: {} {} {}\n", row.tag, terms.join(" + "), row.sense.symbol(), row.rhs));
    }
    out
}

fn parse_var(s: &str) -> Option<Var> {
    if s == "gamma" {
        return Some(Var::Gamma);
    }
    let (kind, rest) = s.split_at_checked(1)?;
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    let (k, l) = inner.split_once(',')?;
    let (k, l) = (k.parse().ok()?, l.parse().ok()?);
    match kind {
        "a" => Some(Var::A(k, l)),
        "b" => Some(Var::B(k, l)),
        _ => None,
    }
}

pub fn parse_lp_text<S: Scalar + FromStr>(text: &str) -> Result<LpModel<S>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let err = |line: usize, message: &str| Error::Parse { line: line + 1, message: message.to_string() };
    let scalar = |line: usize, s: &str| s.parse::<S>().map_err(|_| err(line, &format!("bad number `{s}`")));

    let (n, header) = lines.next().ok_or_else(|| err(0, "empty input"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (variant, kmax, ellmax) = match h.as_slice() {
        ["model", v, k, l] => {
            let variant = match *v {
                "unweighted" => Variant::Unweighted,
                "weighted" => Variant::Weighted,
                _ => return Err(err(n, "unknown variant")),
            };
            let k = k.parse().map_err(|_| err(n, "bad kmax"))?;
            let l = l.parse().map_err(|_| err(n, "bad ellmax"))?;
            (variant, k, l)
        }
        _ => return Err(err(n, "expected `model <variant> <kmax> <ellmax>`")),
    };
    let mut model = LpModel::new(variant, (kmax, ellmax));

    let (n, vars) = lines.next().ok_or_else(|| err(n, "missing vars line"))?;
    let names = vars.strip_prefix("vars ").ok_or_else(|| err(n, "expected `vars ...`"))?;
    for name in names.split_whitespace() {
        let v = parse_var(name).ok_or_else(|| err(n, &format!("bad variable `{name}`")))?;
        model.var(v);
    }
    match lines.next() {
        Some((_, l)) if l.trim() == "maximize gamma" => {}
        Some((n, _)) => return Err(err(n, "expected `maximize gamma`")),
        None => return Err(err(n, "missing objective")),
    }

    for (n, line) in lines {
        let (tag, body) = line.split_once(": ").ok_or_else(|| err(n, "missing `tag: `"))?;
        let mut parts = body.rsplitn(3, ' ');
        let rhs = scalar(n, parts.next().unwrap_or(""))?;
        let sense = match parts.next() {
            Some("<=") => Sense::Le,
            Some("=") => Sense::Eq,
            Some(">=") => Sense::Ge,
            _ => return Err(err(n, "bad sense")),
        };
        let mut coeffs = Vec::new();
        for term in parts.next().unwrap_or("").split(" + ").filter(|t| !t.is_empty()) {
            let (c, v) = term.split_once('*').ok_or_else(|| err(n, &format!("bad term `{term}`")))?;
            let v = parse_var(v).ok_or_else(|| err(n, &format!("bad variable `{v}`")))?;
            let j = model.index_of(v).ok_or_else(|| err(n, &format!("undeclared variable `{v}`")))?;
            coeffs.push((j, scalar(n, c)?));
        }
        model.push_raw_row(Row { tag: tag.to_string(), coeffs, sense, rhs });
    }
    Ok(model)
}
