//! Field, place, datum and tower specifications from the command line or
//! from JSON files.

use std::path::Path;

use ffiwasawa::artin_schreier::{artin_schreier_datum, CurveAS};
use ffiwasawa::extension::{DatumConfig, ExtensionDatum};
use ffiwasawa::ffpoly::{FieldSpec, Place, Poly};
use ffiwasawa::iwasawa::TowerDatum;
use ffiwasawa::stickelberger::PlaceSets;
use ffiwasawa::unitsreg::p_part_quotient;
use ffiwasawa::{Error, Result};
use serde_json::Value;

/// F_q from q = p^e.
pub fn field(q: u32) -> Result<FieldSpec> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("q = {q} is not a prime power")));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let (mut m, mut e) = (q, 0);
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    if m != 1 {
        return Err(Error::InvalidInput(format!("q = {q} is not a prime power")));
    }
    FieldSpec::new(p, e)
}

pub fn places(list: &[String], f: &FieldSpec) -> Result<Vec<Place>> {
    list.iter().map(|s| Place::parse(s.trim(), f)).collect()
}

pub fn place_sets(s: &[String], t: &[String], f: &FieldSpec) -> Result<PlaceSets> {
    PlaceSets::new(places(s, f)?, places(t, f)?)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse(format!("missing string field \"{key}\"")))
}

fn u64_field(v: &Value, key: &str) -> Result<u64> {
    v.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse(format!("missing integer field \"{key}\"")))
}

fn string_list(v: &Value, key: &str) -> Result<Vec<String>> {
    match v.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Array(a)) => a
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| Error::Parse(format!("\"{key}\" must hold strings"))))
            .collect(),
        Some(_) => Err(Error::Parse(format!("\"{key}\" must be a list"))),
    }
}

/// A datum is either a path to a JSON file or an inline spec:
/// `trivial`, `constant:M`, `carlitz:F`, `as:H` (the cover y^p - y = H).
/// JSON files hold either a serialized datum or
/// `{"kind": ..., "q": ..., "modulus"|"degree"|"h": ..., "p_part": bool}`.
pub fn datum(spec: &str, q: u32, p_part: bool) -> Result<ExtensionDatum> {
    let path = Path::new(spec);
    let d = if path.is_file() {
        let v = read_json(path)?;
        if v.get("elementary_divisors").is_some() {
            let c: DatumConfig = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
            ExtensionDatum::from_config(&c)?
        } else {
            let q = v.get("q").and_then(Value::as_u64).map(|x| x as u32).unwrap_or(q);
            let f = field(q)?;
            let kind = str_field(&v, "kind")?;
            let inline = match kind {
                "trivial" => "trivial".to_string(),
                "constant" => format!("constant:{}", u64_field(&v, "degree")?),
                "carlitz" => format!("carlitz:{}", str_field(&v, "modulus")?),
                "as" | "artin_schreier" => format!("as:{}", str_field(&v, "h")?),
                other => return Err(Error::Parse(format!("unknown datum kind \"{other}\""))),
            };
            let p_part = p_part || v.get("p_part").and_then(Value::as_bool).unwrap_or(false);
            return datum_inline(&inline, &f, p_part);
        }
    } else {
        return datum_inline(spec, &field(q)?, p_part);
    };
    if p_part {
        p_part_quotient(&d)
    } else {
        Ok(d)
    }
}

fn datum_inline(spec: &str, f: &FieldSpec, p_part: bool) -> Result<ExtensionDatum> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let d = match kind.trim() {
        "trivial" => ExtensionDatum::trivial(f),
        "constant" => {
            let m = arg.trim().parse().map_err(|_| Error::Parse(format!("bad constant degree \"{arg}\"")))?;
            ExtensionDatum::constant(f, m)?
        }
        "carlitz" => ExtensionDatum::carlitz(f, &Poly::parse(arg.trim(), 'T', f)?)?,
        "as" => artin_schreier_datum(&CurveAS::new(f, Poly::parse(arg.trim(), 'T', f)?)?)?,
        other => return Err(Error::Parse(format!("unknown datum \"{other}\" (and no such file)"))),
    };
    if p_part {
        p_part_quotient(&d)
    } else {
        Ok(d)
    }
}

/// Tower files: `{"kind": "constant" | "constant_over_cover" | "carlitz_quotient",
/// "q": q, "h": H, "prime": P, "S": [...], "T": [...]}`.
pub fn tower(path: &Path, layers: u32) -> Result<TowerDatum> {
    let v = read_json(path)?;
    let q = u64_field(&v, "q")? as u32;
    let f = field(q)?;
    let sets = place_sets(&string_list(&v, "S")?, &string_list(&v, "T")?, &f)?;
    match str_field(&v, "kind")? {
        "constant" => TowerDatum::constant(&f, sets, layers),
        "constant_over_cover" => {
            let curve = CurveAS::new(&f, Poly::parse(str_field(&v, "h")?, 'T', &f)?)?;
            TowerDatum::constant_over_cover(&curve, sets, layers)
        }
        "carlitz_quotient" => {
            let prime = Poly::parse(str_field(&v, "prime")?, 'T', &f)?;
            TowerDatum::carlitz_quotient(&f, &prime, sets, layers)
        }
        other => Err(Error::Parse(format!("unknown tower kind \"{other}\""))),
    }
}
