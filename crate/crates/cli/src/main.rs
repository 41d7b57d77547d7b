use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ffiwasawa::character::characters;
use ffiwasawa::corpus;
use ffiwasawa::ffpoly::enumerate_places;
use ffiwasawa::group::GElem;
use ffiwasawa::iwasawa::{main_theorem_check_d1, weierstrass_prepare, LambdaElement, Verdict, DEFAULT_P_PRECISION, DEFAULT_T_PRECISION};
use ffiwasawa::lfunc::{class_number, l_polynomial, zeta_ratio_check};
use ffiwasawa::stickelberger::{default_bound, theta_element};
use ffiwasawa::unitsreg::{classical_regulator, cl_kst_order, enlarge_s, gross_congruence_check_at, st_units, DEFAULT_PRECISION};
use ffiwasawa::{Error, Result};
use num_bigint::BigInt;
use serde_json::{json, Value};

mod input;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "ffiwasawa", version, about = "Stickelberger elements, L-functions and Iwasawa invariants over F_q(T)")]
struct Cli {
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true, env = "FFIWASAWA_THREADS")]
    threads: Option<usize>,

    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FieldArgs {
    /// Size of the constant field.
    #[arg(long, default_value_t = 2)]
    q: u32,
}

#[derive(Args)]
struct SetArgs {
    /// Places of S, e.g. inf,T,T^2+T+1.
    #[arg(long = "S", alias = "s", value_delimiter = ',', num_args = 0..)]
    s: Vec<String>,
    /// Places of T.
    #[arg(long = "T", alias = "t", value_delimiter = ',', num_args = 0..)]
    t: Vec<String>,
}

#[derive(Args)]
struct DatumArgs {
    /// JSON file, or one of trivial, constant:M, carlitz:F, as:H.
    #[arg(long)]
    datum: String,
    /// Replace the datum by its maximal p-quotient.
    #[arg(long)]
    p_part: bool,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Subcommand)]
enum Command {
    /// List places up to a degree.
    Places {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        max_degree: u32,
        #[arg(long)]
        no_infinity: bool,
    },
    /// S-units congruent to 1 mod T.
    Units {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        sets: SetArgs,
        /// The place left out of the regulator matrix.
        #[arg(long)]
        v0: Option<String>,
    },
    /// Class number of the curve of a datum.
    Classnumber {
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// L-polynomials of every character.
    Lfunction {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        sets: SetArgs,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// The Stickelberger element theta_{S,T}.
    Stickelberger {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        sets: SetArgs,
        /// Expected degree in u.
        #[arg(long)]
        u_bound: Option<usize>,
    },
    /// theta = |Cl| det mod I^{r+1}.
    GrossCheck {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        sets: SetArgs,
        /// Coefficients in Z/p^N.
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Valuation form of the zeta ratio for a subgroup.
    ZetaRatio {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        sets: SetArgs,
        /// Generators of the subgroup, coordinates separated by commas.
        #[arg(long = "h", num_args = 0..)]
        h: Vec<String>,
    },
    /// Enlarge S until its degrees have gcd 1.
    EnlargeS {
        /// One or more layers.
        #[arg(long, required = true, num_args = 1..)]
        datum: Vec<String>,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        sets: SetArgs,
        /// Largest degree searched.
        #[arg(long, default_value_t = 6)]
        budget: u32,
    },
    /// Weierstrass preparation in Z_p[[t]].
    Weierstrass {
        #[arg(long)]
        p: u64,
        /// Coefficients a_0, a_1, ...
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        coeffs: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_P_PRECISION)]
        precision: u32,
        #[arg(long, default_value_t = DEFAULT_T_PRECISION)]
        t_precision: usize,
    },
    /// Main-theorem check on a Z_p-tower.
    TowerVerify {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, default_value_t = 3)]
        layers: u32,
    },
    /// Run the acceptance corpus.
    Corpus {
        /// Only criteria whose name contains this.
        #[arg(default_value = "")]
        filter: String,
        /// Also rerun under 1 and 8 threads and compare the output.
        #[arg(long)]
        determinism: bool,
    },
}

fn big(s: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad integer \"{s}\"")))
}

fn strings<T: ToString>(xs: impl IntoIterator<Item = T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

fn run(cmd: Command) -> Result<(Value, bool)> {
    let ok = |v: Value| Ok((v, true));
    match cmd {
        Command::Places { field, max_degree, no_infinity } => {
            let f = input::field(field.q)?;
            let ps = enumerate_places(&f, max_degree, !no_infinity)?;
            let list: Vec<Value> = ps.iter().map(|p| json!({ "place": p.to_string(), "degree": p.degree() })).collect();
            ok(json!({ "q": field.q, "count": list.len(), "places": list }))
        }
        Command::Units { field, sets, v0 } => {
            let f = input::field(field.q)?;
            let ss = input::place_sets(&sets.s, &sets.t, &f)?;
            let v0 = v0.map(|v| ffiwasawa::ffpoly::Place::parse(&v, &f)).transpose()?;
            let lat = st_units(&f, &ss, v0.as_ref())?;
            ok(json!({
                "rank": lat.rank(),
                "v0": lat.v0.to_string(),
                "order": strings(&lat.order),
                "finite": strings(&lat.finite),
                "basis": lat.basis,
                "matrix": lat.matrix,
                "regulator": classical_regulator(&lat)?.to_string(),
                "cl_st_order": cl_kst_order(&f, &ss)?.to_string(),
            }))
        }
        Command::Classnumber { datum, bound } => {
            let d = input::datum(&datum.datum, datum.field.q, datum.p_part)?;
            ok(json!({ "group": d.group().divisors(), "class_number": class_number(&d, bound)?.to_string() }))
        }
        Command::Lfunction { datum, sets, bound } => {
            let d = input::datum(&datum.datum, datum.field.q, datum.p_part)?;
            let ss = input::place_sets(&sets.s, &sets.t, d.field())?;
            let mut rows = Vec::new();
            for chi in characters(d.group()) {
                let l = l_polynomial(&d, &chi, &ss, bound)?;
                rows.push(json!({
                    "character": { "order": chi.target_order, "exponents": chi.exponents },
                    "degree": l.degree(),
                    "coefficients": strings(&l.coeffs),
                    "value_at_one": l.value_at_one().to_string(),
                }));
            }
            ok(json!({ "group": d.group().divisors(), "l_polynomials": rows }))
        }
        Command::Stickelberger { datum, sets, u_bound } => {
            let d = input::datum(&datum.datum, datum.field.q, datum.p_part)?;
            let ss = input::place_sets(&sets.s, &sets.t, d.field())?;
            let start = Instant::now();
            let r = theta_element(&d, &ss, u_bound)?;
            eprintln!("stickelberger: {:.3}s", start.elapsed().as_secs_f64());
            ok(json!({
                "group": d.group().divisors(),
                "bound": default_bound(&d, &ss),
                "degree": r.polynomial_degree,
                "stabilized": r.stabilized,
                "series": r.series.to_json(),
                "theta": r.theta.to_string(),
                "theta_terms": r.theta.to_json(),
            }))
        }
        Command::GrossCheck { datum, sets, precision } => {
            let d = input::datum(&datum.datum, datum.field.q, datum.p_part)?;
            let ss = input::place_sets(&sets.s, &sets.t, d.field())?;
            let r = gross_congruence_check_at(&d, &ss, precision)?;
            ok(json!({
                "r": r.r,
                "precision": r.precision,
                "cl_st_order": r.cl_order.to_string(),
                "classical_regulator": r.classical_regulator.to_string(),
                "units": r.regulator.lattice.basis,
                "places": strings(&r.regulator.lattice.order),
                "symbols": r.regulator.symbols,
                "theta": r.theta.to_json(),
                "theta_order": r.theta_form.order,
                "det": r.regulator.element.to_json(),
                "det_leading_form": strings(&r.regulator.value.leading_form),
                "difference_order": r.difference_order,
                "holds": true,
            }))
        }
        Command::ZetaRatio { datum, sets, h } => {
            let d = input::datum(&datum.datum, datum.field.q, datum.p_part)?;
            let ss = input::place_sets(&sets.s, &sets.t, d.field())?;
            let gens = h
                .iter()
                .map(|g| g.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad element \"{g}\"")))).collect())
                .collect::<Result<Vec<GElem>>>()?;
            let g = d.group();
            let sub: Vec<GElem> = g.closure(&gens).into_iter().map(|i| g.from_index(i)).collect();
            let r = zeta_ratio_check(&d, &sub, &ss)?;
            ok(json!({
                "subgroup_order": sub.len(),
                "r": r.r,
                "character_product": r.character_product.to_string(),
                "lhs_valuation": r.lhs_valuation,
                "rhs_valuation": r.rhs_valuation,
                "class_number": r.class_number.to_string(),
                "class_number_quotient": r.class_number_quotient.to_string(),
            }))
        }
        Command::EnlargeS { datum, field, sets, budget } => {
            let layers = datum.iter().map(|s| input::datum(s, field.q, false)).collect::<Result<Vec<_>>>()?;
            let ss = input::place_sets(&sets.s, &sets.t, layers[0].field())?;
            let e = enlarge_s(&ss, &layers, budget)?;
            ok(json!({ "S": strings(e.sets.s()), "T": strings(e.sets.t()), "added": e.added, "gcd": e.gcd }))
        }
        Command::Weierstrass { p, coeffs, precision, t_precision } => {
            let c = coeffs.iter().map(|s| big(s)).collect::<Result<Vec<_>>>()?;
            let eta = LambdaElement::new(p, precision, t_precision, &c);
            let w = weierstrass_prepare(&eta)?;
            ok(json!({
                "p": p,
                "precision": precision,
                "t_precision": t_precision,
                "mu": w.mu,
                "lambda": w.lambda,
                "distinguished": strings(&w.distinguished),
                "unit": strings(w.unit.coeffs()),
            }))
        }
        Command::TowerVerify { tower, layers } => {
            let t = input::tower(&tower, layers)?;
            let r = main_theorem_check_d1(&t)?;
            let consistent = !matches!(r.verdict, Verdict::Inconsistent);
            let v = serde_json::to_value(&r).map_err(|e| Error::InvalidInput(e.to_string()))?;
            Ok((v, consistent))
        }
        Command::Corpus { filter, determinism } => {
            let report = corpus::run(&filter);
            let mut criteria = report.criteria.clone();
            if determinism {
                criteria.push(corpus::determinism(&filter, &[1, 8])?);
            }
            for c in &criteria {
                eprintln!("{:>2} {:<24} {}", c.id, c.name, if c.pass { "PASS" } else { "FAIL" });
            }
            let inconsistent = criteria.iter().any(|c| c.detail.get("kind").and_then(Value::as_str) == Some("inconsistency"));
            if !inconsistent && criteria.iter().any(|c| !c.pass) {
                return Err(Error::Inconclusive("corpus criteria failed; see the report".into()));
            }
            Ok((json!({ "criteria": criteria }), !inconsistent))
        }
    }
}

fn emit(doc: &Value, out: Option<&PathBuf>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("serialisable") + "\n";
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let (mut doc, status) = match run(cli.command) {
        Ok((v, true)) => (v, 0),
        Ok((v, false)) => (v, 2),
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_theorem_violation() { 2 } else { 1 };
            (json!({ "error": e.to_string() }), code)
        }
    };
    if let Value::Object(m) = &mut doc {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("status".into(), json!(status));
    }
    if let Err(e) = emit(&doc, cli.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(status)
}
