//! The acceptance corpus: fixed configurations run through every pipeline
//! with a pass/fail verdict and a deterministic JSON certificate.

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use crate::artin_schreier::{artin_schreier_datum, curve_p1, CurveAS};
use crate::error::{Error, Result};
use crate::extension::ExtensionDatum;
use crate::ffpoly::{places_of_degree, FieldSpec, Place, Poly};
use crate::group::GElem;
use crate::iwasawa::{main_theorem_check_d1, TowerDatum, Verdict};
use crate::lfunc::{b_constant, class_number};
use crate::stickelberger::{check_functoriality, theta_element, PlaceSets};
use crate::unitsreg::{gross_congruence_check, p_part_quotient};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub schema_version: u32,
    pub criteria: Vec<CriterionResult>,
}

impl CorpusReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }
}

type Criterion = (u32, &'static str, fn() -> Result<Value>);

const CRITERIA: [Criterion; 7] = [
    (1, "polynomiality", polynomiality),
    (2, "functoriality", functoriality),
    (3, "class-number", class_numbers),
    (4, "gross-congruence", gross),
    (5, "valuation-law", valuation_law),
    (6, "main-theorem-constant", main_theorem_constant),
    (7, "b-constant", b_constants),
];

/// Names of the criteria, in run order.
pub fn criterion_names() -> Vec<&'static str> {
    let mut v: Vec<&str> = CRITERIA.iter().map(|c| c.1).collect();
    v.push("determinism");
    v
}

/// Runs the criteria whose name contains `filter` (all when empty),
/// excluding the determinism criterion.
pub fn run(filter: &str) -> CorpusReport {
    let criteria = CRITERIA
        .iter()
        .filter(|(_, name, _)| name.contains(filter))
        .map(|(id, name, f)| {
            let (pass, detail) = match f() {
                Ok(v) => (true, v),
                Err(e) => (false, json!({ "error": e.to_string(), "kind": error_kind(&e) })),
            };
            CriterionResult { id: *id, name: name.to_string(), pass, detail }
        })
        .collect();
    CorpusReport { schema_version: SCHEMA_VERSION, criteria }
}

fn error_kind(e: &Error) -> &'static str {
    if e.is_theorem_violation() {
        "inconsistency"
    } else {
        "error"
    }
}

/// Runs the corpus on rayon pools of each given size, twice on the first,
/// and compares the JSON byte for byte.
pub fn determinism(filter: &str, threads: &[usize]) -> Result<CriterionResult> {
    let mut outputs = Vec::new();
    for (i, &n) in threads.iter().enumerate() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ResourceLimit(e.to_string()))?;
        let reps = if i == 0 { 2 } else { 1 };
        for _ in 0..reps {
            outputs.push((n, pool.install(|| run(filter).to_json_string())));
        }
    }
    let pass = outputs.windows(2).all(|w| w[0].1 == w[1].1);
    let runs: Vec<Value> = outputs.iter().map(|(n, s)| json!({ "threads": n, "bytes": s.len() })).collect();
    Ok(CriterionResult { id: 8, name: "determinism".into(), pass, detail: json!({ "runs": runs }) })
}

fn fld(p: u32) -> FieldSpec {
    FieldSpec::prime(p).expect("prime")
}

fn place(s: &str, f: &FieldSpec) -> Place {
    Place::parse(s, f).expect("corpus place")
}

fn sets(f: &FieldSpec, s: &[&str], t: &[&str]) -> PlaceSets {
    PlaceSets::new(s.iter().map(|x| place(x, f)), t.iter().map(|x| place(x, f))).expect("corpus sets")
}

/// S = {inf} plus the primes of f; T = the first place of least degree
/// prime to f.
fn default_sets(d: &ExtensionDatum) -> PlaceSets {
    let f = d.field();
    let mut s = vec![Place::Infinity];
    s.extend(d.modulus_primes().into_iter().map(Place::Finite));
    let t = (1..)
        .flat_map(|deg| places_of_degree(f, deg))
        .find(|v| !s.contains(v))
        .expect("a place prime to f");
    PlaceSets::new(s, [t]).expect("disjoint")
}

fn monic_polys(q: u32, d: usize) -> impl Iterator<Item = Poly> {
    (0..(q as u64).pow(d as u32)).map(move |i| Poly::monic_from_index(q, d, i))
}

fn polynomiality() -> Result<Value> {
    let mut rows = Vec::new();
    for p in [2u32, 3] {
        let f = fld(p);
        for d in 1..=3 {
            for m in monic_polys(p, d) {
                let datum = ExtensionDatum::carlitz(&f, &m)?;
                let ss = default_sets(&datum);
                let r = theta_element(&datum, &ss, None).map_err(|e| Error::Inconsistency(format!("Carlitz {m} over F_{p}: {e}")))?;
                rows.push(json!({ "q": p, "datum": format!("carlitz {m}"), "degree": r.polynomial_degree, "theta": r.theta.to_string() }));
            }
        }
        for m in 1..=8u64 {
            let datum = ExtensionDatum::constant(&f, m)?;
            let ss = sets(&f, &["inf"], &["T"]);
            let r = theta_element(&datum, &ss, None).map_err(|e| Error::Inconsistency(format!("constant {m} over F_{p}: {e}")))?;
            rows.push(json!({ "q": p, "datum": format!("constant {m}"), "degree": r.polynomial_degree, "theta": r.theta.to_string() }));
        }
    }
    Ok(json!({ "count": rows.len(), "rows": rows }))
}

fn subgroup(d: &ExtensionDatum, gens: &[GElem]) -> Vec<GElem> {
    let g = d.group();
    g.closure(gens).into_iter().map(|i| g.from_index(i)).collect()
}

fn functoriality() -> Result<Value> {
    let mut rows = Vec::new();
    let mut cases: Vec<(ExtensionDatum, PlaceSets)> = Vec::new();
    for (p, m) in [(2u32, "T^3"), (2, "T^2+T"), (2, "T^3+T+1"), (3, "T^2"), (3, "T^2+1"), (3, "T^2+T")] {
        let f = fld(p);
        let d = ExtensionDatum::carlitz(&f, &Poly::parse(m, 'T', &f)?)?;
        let ss = default_sets(&d);
        cases.push((d, ss));
    }
    let f2 = fld(2);
    let c8 = ExtensionDatum::constant(&f2, 8)?;
    cases.push((c8, sets(&f2, &["inf"], &["T"])));
    let f3 = fld(3);
    let c9 = ExtensionDatum::constant(&f3, 9)?;
    cases.push((c9, sets(&f3, &["inf"], &["T"])));
    let cc = ExtensionDatum::carlitz(&f2, &Poly::parse("T^2", 'T', &f2)?)?.compositum_with_constant(4)?;
    let ss = default_sets(&cc);
    cases.push((cc, ss));
    for (d, ss) in &cases {
        let g = d.group();
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..g.rank() {
            for k in 1..=4i64 {
                let gen = g.scale(&g.basis(i), k);
                if g.is_zero(&gen) {
                    continue;
                }
                let h = subgroup(d, &[gen.clone()]);
                if h.len() as u64 == g.order() || !seen.insert(h.clone()) {
                    continue;
                }
                let r = check_functoriality(d, &h, ss)?;
                rows.push(json!({
                    "modulus": d.modulus().to_string(),
                    "group": g.divisors(),
                    "h_generator": gen,
                    "theta_quotient": r.theta_quotient.to_string(),
                }));
            }
        }
    }
    if rows.len() < 10 {
        return Err(Error::Inconsistency(format!("only {} nested pairs", rows.len())));
    }
    Ok(json!({ "pairs": rows.len(), "rows": rows }))
}

fn class_numbers() -> Result<Value> {
    let mut rows = Vec::new();
    for (p, h) in [(2u32, "T^3"), (2, "T^5"), (2, "T^3+T"), (3, "T^2"), (3, "T^4+T")] {
        let f = fld(p);
        let curve = CurveAS::new(&f, Poly::parse(h, 'T', &f)?)?;
        let p1 = curve_p1(&curve)?;
        let from_counts: BigInt = p1.iter().sum();
        let from_chars = class_number(&artin_schreier_datum(&curve)?, None)?;
        if from_counts != from_chars {
            return Err(Error::Inconsistency(format!("y^p - y = {h}: {from_counts} vs {from_chars}")));
        }
        rows.push(json!({ "q": p, "h": h, "genus": curve.genus(), "p1": p1.iter().map(|c| c.to_string()).collect::<Vec<_>>(), "class_number": from_chars.to_string() }));
    }
    if rows[0]["class_number"] != "3" {
        return Err(Error::Inconsistency("y^2 + y = x^3 does not have class number 3".into()));
    }
    Ok(json!({ "rows": rows }))
}

fn gross() -> Result<Value> {
    let f2 = fld(2);
    let f3 = fld(3);
    let carlitz_p = |f: &FieldSpec, m: &str| -> Result<ExtensionDatum> {
        p_part_quotient(&ExtensionDatum::carlitz(f, &Poly::parse(m, 'T', f)?)?)
    };
    let cases = [
        ("constant 2", ExtensionDatum::constant(&f2, 2)?, sets(&f2, &["inf"], &["T"])),
        ("constant 4", ExtensionDatum::constant(&f2, 4)?, sets(&f2, &["inf", "T"], &["T+1"])),
        ("carlitz T^2 2-part", carlitz_p(&f2, "T^2")?, sets(&f2, &["T", "inf"], &["T^2+T+1"])),
        ("carlitz T^3 2-part", carlitz_p(&f2, "T^3")?, sets(&f2, &["T", "inf", "T+1"], &["T^2+T+1"])),
        ("constant 9", ExtensionDatum::constant(&f3, 9)?, sets(&f3, &["inf", "T", "T+1"], &["T+2"])),
        ("carlitz T^2 3-part", carlitz_p(&f3, "T^2")?, sets(&f3, &["T", "inf"], &["T+1"])),
    ];
    let mut rows = Vec::new();
    for (name, d, ss) in cases {
        let r = gross_congruence_check(&d, &ss).map_err(|e| match e {
            Error::Inconsistency(m) => Error::Inconsistency(format!("{name}: {m}")),
            other => other,
        })?;
        rows.push(json!({
            "datum": name,
            "r": r.r,
            "precision": r.precision,
            "cl": r.cl_order.to_string(),
            "classical_regulator": r.classical_regulator.to_string(),
            "theta": r.theta.to_string(),
            "regulator": r.regulator.element.to_string(),
            "difference_order": r.difference_order,
        }));
    }
    Ok(json!({ "rows": rows }))
}

fn shipped_towers() -> Result<Vec<(&'static str, TowerDatum)>> {
    let f2 = fld(2);
    let f3 = fld(3);
    let curve = CurveAS::new(&f2, Poly::parse("T^3", 'T', &f2)?)?;
    Ok(vec![
        ("constant F_2 genus 0", TowerDatum::constant(&f2, sets(&f2, &["inf"], &["T"]), 3)?),
        ("constant F_2 over y^2+y=x^3", TowerDatum::constant_over_cover(&curve, sets(&f2, &["T"], &["T+1"]), 3)?),
        ("constant F_3 genus 0", TowerDatum::constant(&f3, sets(&f3, &["inf", "T"], &["T+1"]), 3)?),
        (
            "carlitz quotient at T over F_2",
            TowerDatum::carlitz_quotient(&f2, &Poly::t(), sets(&f2, &["T", "inf"], &["T^2+T+1"]), 3)?,
        ),
    ])
}

fn valuation_law() -> Result<Value> {
    let mut rows = Vec::new();
    for (name, t) in shipped_towers()? {
        let r = main_theorem_check_d1(&t)?;
        let fit = r.theta_fit.clone().ok_or_else(|| Error::Inconclusive(format!("{name}: valuations did not stabilise")))?;
        if !r.conjugates_agree {
            return Err(Error::Inconsistency(format!("{name}: conjugates disagree")));
        }
        rows.push(json!({ "tower": name, "valuations": r.theta_valuations, "mu": fit.mu, "l": fit.lambda_plus, "layers": fit.layers }));
    }
    Ok(json!({ "rows": rows }))
}

fn main_theorem_constant() -> Result<Value> {
    let mut rows = Vec::new();
    for (name, t) in shipped_towers()?.into_iter().take(2) {
        let r = main_theorem_check_d1(&t)?;
        if r.verdict != Verdict::MainTheoremConsistent {
            return Err(Error::Inconsistency(format!("{name}: {:?}", r.verdict)));
        }
        rows.push(json!({
            "tower": name,
            "theta_fit": r.theta_fit,
            "deg_delta": r.deg_delta,
            "class_numbers": r.class_numbers,
            "growth": r.growth,
            "polynomial_check": r.polynomial_check,
        }));
    }
    Ok(json!({ "rows": rows }))
}

fn b_constants() -> Result<Value> {
    let f2 = fld(2);
    let f3 = fld(3);
    let cases = [
        (&f2, sets(&f2, &["inf", "T"], &["T+1"])),
        (&f2, sets(&f2, &["inf", "T", "T+1"], &["T^2+T+1"])),
        (&f2, sets(&f2, &["T^2+T+1"], &["T", "T+1"])),
        (&f3, sets(&f3, &["inf", "T^2+1"], &["T", "T+1"])),
        (&f3, sets(&f3, &["T", "T+1", "T+2"], &["inf"])),
    ];
    let mut rows = Vec::new();
    for (f, ss) in cases {
        let b = b_constant(f, &ss)?;
        rows.push(json!({
            "q": f.q(),
            "s": ss.s().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "t": ss.t().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "r": b.r,
            "b": b.formula.to_string(),
        }));
    }
    Ok(json!({ "rows": rows }))
}
