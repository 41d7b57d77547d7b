//! S,T-units of F_q(T), ray class numbers of k, classical and refined
//! regulators, and the search for enlarged sets S.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::ExtensionDatum;
use crate::ffpoly::{ord_at, places_of_degree, FieldSpec, Place, Poly, RationalFunction};
use crate::group::{AbelianGroup, GElem};
use crate::groupring::{augmentation_analysis, AugmentationForm, CoefficientRing, GroupRingElement};
use crate::intmat::{det_i128, kernel, smith, Mat};
use crate::stickelberger::{theta_element, PlaceSets};
use crate::units::UnitGroup;

/// Default precision exponent N for Z/p^N coefficients.
pub const DEFAULT_PRECISION: u32 = 24;

/// gamma^constant * prod P_k^{exponents[k]} over the finite places of S.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SUnit {
    pub constant: i64,
    pub exponents: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitLattice {
    field: FieldSpec,
    /// The excluded place v_0.
    pub v0: Place,
    /// v_1..v_r.
    pub order: Vec<Place>,
    /// Monic generators of the finite places of S.
    pub finite: Vec<Poly>,
    pub basis: Vec<SUnit>,
    /// M[i][j] = ord_{v_i}(u_j) deg(v_i).
    pub matrix: Vec<Vec<i64>>,
}

impl UnitLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn ord(&self, v: &Place, u: &SUnit) -> i64 {
        match v {
            Place::Infinity => -self
                .finite
                .iter()
                .zip(&u.exponents)
                .map(|(p, a)| a * p.deg() as i64)
                .sum::<i64>(),
            Place::Finite(p) => self.finite.iter().position(|q| q == p).map_or(0, |k| u.exponents[k]),
        }
    }

    pub fn to_rational(&self, u: &SUnit) -> RationalFunction {
        let f = &self.field;
        let g = f.primitive_element();
        let c = f.pow(g, u.constant.rem_euclid(f.q() as i64 - 1) as u64);
        let mut num = Poly::constant(c);
        let mut den = Poly::one();
        for (p, &a) in self.finite.iter().zip(&u.exponents) {
            if a > 0 {
                num = num.mul(&p.pow(a as u32, f), f);
            } else if a < 0 {
                den = den.mul(&p.pow((-a) as u32, f), f);
            }
        }
        RationalFunction { num, den }
    }

    /// The same lattice on the basis u_j' = prod u_k^{m[k][j]}.
    pub fn change_basis(&self, m: &[Vec<i64>]) -> Result<UnitLattice> {
        let r = self.rank();
        let det = det_i128(&m.iter().map(|row| row.iter().map(|&x| x as i128).collect()).collect());
        if det.abs() != 1 {
            return Err(Error::InvalidInput("basis change is not unimodular".into()));
        }
        let basis: Vec<SUnit> = (0..r)
            .map(|j| {
                let mut u = SUnit { constant: 0, exponents: vec![0; self.finite.len()] };
                for k in 0..r {
                    u.constant += m[k][j] * self.basis[k].constant;
                    for (e, b) in u.exponents.iter_mut().zip(&self.basis[k].exponents) {
                        *e += m[k][j] * b;
                    }
                }
                u
            })
            .collect();
        let mut out = self.clone();
        out.matrix = valuation_matrix(&out, &basis);
        out.basis = basis;
        Ok(out)
    }
}

fn valuation_matrix(l: &UnitLattice, basis: &[SUnit]) -> Vec<Vec<i64>> {
    l.order
        .iter()
        .map(|v| basis.iter().map(|u| l.ord(v, u) * v.degree() as i64).collect())
        .collect()
}

/// Residues of constants and S-generators in prod_{w in T} F_w^x, as
/// columns over the combined cyclic coordinates.
struct CongruenceMap {
    moduli: Vec<i128>,
    gamma: Vec<i128>,
    gens: Vec<Vec<i128>>,
}

fn congruence_map(field: &FieldSpec, finite: &[Poly], t: &BTreeSet<Place>) -> Result<CongruenceMap> {
    let g = Poly::constant(field.primitive_element());
    let mut out = CongruenceMap { moduli: vec![], gamma: vec![], gens: vec![vec![]; finite.len()] };
    for w in t {
        let modulus = match w {
            Place::Finite(p) => p.clone(),
            // F_infinity = F_q: evaluate the leading coefficient after
            // dividing by T^{deg}; the S-generators are monic, so they map to 1
            Place::Infinity => Poly::t(),
        };
        let ug = UnitGroup::new(field, &modulus)?;
        let divs = ug.group().divisors().to_vec();
        let gl = ug.dlog(&g)?;
        let logs: Vec<GElem> = match w {
            Place::Infinity => finite.iter().map(|_| ug.group().zero()).collect(),
            Place::Finite(_) => finite.iter().map(|p| ug.dlog(p)).collect::<Result<_>>()?,
        };
        for (i, &d) in divs.iter().enumerate() {
            out.moduli.push(d as i128);
            out.gamma.push(gl[i] as i128);
            for (k, l) in logs.iter().enumerate() {
                out.gens[k].push(l[i] as i128);
            }
        }
    }
    Ok(out)
}

fn finite_places(sets: &PlaceSets) -> Vec<Poly> {
    sets.s().iter().filter_map(|v| v.poly().cloned()).collect()
}

/// Exponent lattice L_0 of S-units modulo constants, as rows over the
/// finite places of S.
fn exponent_lattice(sets: &PlaceSets, finite: &[Poly]) -> Vec<Vec<i128>> {
    let n = finite.len();
    if sets.s().contains(&Place::Infinity) {
        (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
    } else {
        let row: Mat = vec![finite.iter().map(|p| p.deg() as i128).collect()];
        kernel(&row, n)
    }
}

/// Z-basis of U_{k,S,T} modulo torsion, with v_0 excluded from the
/// valuation matrix and the first unit inverted if needed so det M > 0.
pub fn st_units(field: &FieldSpec, sets: &PlaceSets, v0: Option<&Place>) -> Result<UnitLattice> {
    let v0 = match v0 {
        Some(v) if sets.s().contains(v) => v.clone(),
        Some(v) => return Err(Error::InvalidInput(format!("v_0 = {v} is not in S"))),
        None => sets.s().iter().next().unwrap().clone(),
    };
    let finite = finite_places(sets);
    let l0 = exponent_lattice(sets, &finite);
    let r = l0.len();
    let cm = congruence_map(field, &finite, sets.t())?;
    let m = cm.moduli.len();
    // unknowns: e0, c_1..c_r, then one slack per target coordinate
    let cols = 1 + r + m;
    let a: Mat = (0..m)
        .map(|i| {
            let mut row = vec![0i128; cols];
            row[0] = cm.gamma[i];
            for (j, l) in l0.iter().enumerate() {
                row[1 + j] = l.iter().zip(&cm.gens).map(|(e, g)| e * g[i]).sum::<i128>() % cm.moduli[i];
            }
            row[1 + r + i] = cm.moduli[i];
            row
        })
        .collect();
    let ker = if m == 0 {
        (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect()
    } else {
        kernel(&a, cols)
    };
    let gens: Mat = ker.iter().map(|k| k[1..=r].to_vec()).collect();
    let q1 = field.q() as i128 - 1;
    let basis_c: Vec<(i128, Vec<i128>)> = if r == 0 {
        vec![]
    } else {
        let s = smith(&gens, r);
        (0..s.rank)
            .map(|i| {
                let e0: i128 = (0..gens.len()).map(|k| s.u[i][k] * ker[k][0]).sum();
                let c: Vec<i128> = (0..r).map(|j| s.diag[i] * s.v_inv[i][j]).collect();
                (e0.rem_euclid(q1.max(1)), c)
            })
            .collect()
    };
    if basis_c.len() != r {
        return Err(Error::Inconsistency("T-congruence sublattice has the wrong rank".into()));
    }
    let mut basis: Vec<SUnit> = basis_c
        .into_iter()
        .map(|(e0, c)| {
            let exps = (0..finite.len())
                .map(|k| (0..r).map(|j| c[j] * l0[j][k]).sum::<i128>() as i64)
                .collect();
            SUnit { constant: e0 as i64, exponents: exps }
        })
        .collect();
    let order: Vec<Place> = sets.s().iter().filter(|v| **v != v0).cloned().collect();
    let mut lat = UnitLattice { field: field.clone(), v0, order, finite, basis: vec![], matrix: vec![] };
    let mut mat = valuation_matrix(&lat, &basis);
    if r > 0 {
        let det = det_i128(&mat.iter().map(|row| row.iter().map(|&x| x as i128).collect()).collect());
        if det == 0 {
            return Err(Error::Inconsistency("valuation matrix is singular".into()));
        }
        if det < 0 {
            let u = &mut basis[0];
            u.constant = (-u.constant).rem_euclid(q1.max(1) as i64);
            u.exponents.iter_mut().for_each(|e| *e = -*e);
            mat = valuation_matrix(&lat, &basis);
        }
    }
    lat.basis = basis;
    lat.matrix = mat;
    Ok(lat)
}

/// gcd of the degrees of the places of S: |Cl_{k,S}|.
pub fn cl_ks_order(sets: &PlaceSets) -> u64 {
    sets.s().iter().fold(0u64, |g, v| g.gcd(&(v.degree() as u64)))
}

/// |Cl_{k,S,T}| = |Cl_{k,S}| * |coker(O_{k,S}^x -> prod_T F_w^x)|.
pub fn cl_kst_order(field: &FieldSpec, sets: &PlaceSets) -> Result<BigInt> {
    let finite = finite_places(sets);
    let l0 = exponent_lattice(sets, &finite);
    let cm = congruence_map(field, &finite, sets.t())?;
    let m = cm.moduli.len();
    let r = l0.len();
    let mut coker = BigInt::one();
    if m > 0 {
        let cols = 1 + r + m;
        let a: Mat = (0..m)
            .map(|i| {
                let mut row = vec![0i128; cols];
                row[0] = cm.gamma[i];
                for (j, l) in l0.iter().enumerate() {
                    row[1 + j] = l.iter().zip(&cm.gens).map(|(e, g)| e * g[i]).sum::<i128>() % cm.moduli[i];
                }
                row[1 + r + i] = cm.moduli[i];
                row
            })
            .collect();
        let s = smith(&a, cols);
        for d in &s.diag[..s.rank] {
            coker *= BigInt::from(d.abs());
        }
    }
    Ok(coker * BigInt::from(cl_ks_order(sets)))
}

/// |det M|; errors on a singular matrix.
pub fn classical_regulator(lattice: &UnitLattice) -> Result<BigInt> {
    if lattice.rank() == 0 {
        return Ok(BigInt::one());
    }
    let m: Mat = lattice.matrix.iter().map(|row| row.iter().map(|&x| x as i128).collect()).collect();
    let det = det_i128(&m);
    if det == 0 {
        return Err(Error::InvalidInput("valuation matrix is singular: not a unit basis".into()));
    }
    Ok(BigInt::from(det.abs()))
}

fn is_p_group(g: &AbelianGroup, p: u64) -> bool {
    let mut o = g.order();
    while o % p == 0 {
        o /= p;
    }
    o == 1
}

/// Quotient of the datum by the prime-to-p part of G.
pub fn p_part_quotient(datum: &ExtensionDatum) -> Result<ExtensionDatum> {
    let p = datum.field().p() as u64;
    let g = datum.group();
    let h: Vec<GElem> = (0..g.rank())
        .map(|i| {
            let mut d = g.divisors()[i];
            let mut pp = 1;
            while d % p == 0 {
                d /= p;
                pp *= p;
            }
            let mut e = g.zero();
            e[i] = pp as i64;
            e
        })
        .collect();
    let h: Vec<GElem> = g.closure(&h).into_iter().map(|i| g.from_index(i)).collect();
    datum.quotient_datum(&h)
}

/// Places of the datum with nontrivial inertia.
pub fn wild_places(datum: &ExtensionDatum) -> Vec<Place> {
    datum.ramified_places().into_iter().filter(|v| !datum.inertia(v).is_empty()).collect()
}

fn support(x: &RationalFunction, field: &FieldSpec) -> BTreeSet<Place> {
    let mut out = BTreeSet::from([Place::Infinity]);
    for poly in [&x.num, &x.den] {
        let mut rest = poly.monic(field);
        let mut d = 1u32;
        while rest.deg() > 0 && d as i64 <= rest.deg() {
            for v in places_of_degree(field, d) {
                let pp = v.poly().unwrap();
                if rest.valuation(pp, field) > 0 {
                    while rest.valuation(pp, field) > 0 {
                        rest = rest.div_rem(pp, field).unwrap().0;
                    }
                    out.insert(v);
                }
            }
            d += 1;
        }
    }
    out
}

/// psi_{v,G}(u) for a p-group datum: [w]^{-ord_w u} where w is unramified,
/// and at the unique wild place the value forced by reciprocity. A
/// uniformiser maps to the inverse Frobenius, which is the normalisation
/// under which theta = |Cl| det mod I^{r+1}.
pub fn local_norm_residue(datum: &ExtensionDatum, sets: &PlaceSets, v: &Place, u: &RationalFunction) -> Result<GElem> {
    let field = datum.field();
    let g = datum.group();
    if !is_p_group(g, field.p() as u64) {
        return Err(Error::InvalidInput("G must be a p-group".into()));
    }
    let wild = wild_places(datum);
    if wild.len() > 1 {
        return Err(Error::UnsupportedRamification(format!("{} wildly ramified places", wild.len())));
    }
    let supp = support(u, field);
    for w in &supp {
        if !sets.s().contains(w) && ord_at(w, u, field)? != 0 {
            return Err(Error::InvalidInput(format!("not an S-unit: nonzero valuation at {w}")));
        }
    }
    let unram = |w: &Place| -> Result<GElem> { Ok(g.scale(&datum.frobenius_lift(w), -ord_at(w, u, field)?)) };
    if wild.first() != Some(v) {
        return unram(v);
    }
    let mut acc = g.zero();
    for w in supp.iter().filter(|w| *w != v) {
        acc = g.sub(&acc, &unram(w)?);
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct GrossRegulator {
    pub lattice: UnitLattice,
    /// psi_{v_i}(u_j).
    pub symbols: Vec<Vec<GElem>>,
    pub element: GroupRingElement,
    pub value: AugmentationForm,
}

fn ring_det(m: &[Vec<GroupRingElement>], g: &AbelianGroup, ring: CoefficientRing) -> GroupRingElement {
    let n = m.len();
    if n == 0 {
        return GroupRingElement::one(g, ring);
    }
    let mut acc = GroupRingElement::zero(g, ring);
    for j in 0..n {
        let minor: Vec<Vec<GroupRingElement>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][j].mul(&ring_det(&minor, g, ring));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

fn default_v0(datum: &ExtensionDatum, sets: &PlaceSets) -> Result<Option<Place>> {
    match wild_places(datum).first() {
        Some(w) if sets.s().contains(w) => Ok(Some(w.clone())),
        Some(w) => Err(Error::InvalidInput(format!("wild place {w} is not in S"))),
        None => Ok(None),
    }
}

/// det(psi_{v_i}(u_j) - 1) in (Z/p^N)[G] and its class in I^r/I^{r+1}.
pub fn gross_regulator(datum: &ExtensionDatum, sets: &PlaceSets, precision: u32) -> Result<GrossRegulator> {
    let field = datum.field();
    let v0 = default_v0(datum, sets)?;
    let lattice = st_units(field, sets, v0.as_ref())?;
    let g = datum.group();
    let ring = CoefficientRing::ModPPower { p: field.p() as u64, n: precision };
    let r = lattice.rank();
    let mut symbols = vec![vec![g.zero(); r]; r];
    let mut m = vec![vec![GroupRingElement::zero(g, ring); r]; r];
    for (i, v) in lattice.order.iter().enumerate() {
        for (j, u) in lattice.basis.iter().enumerate() {
            let s = local_norm_residue(datum, sets, v, &lattice.to_rational(u))?;
            m[i][j] = GroupRingElement::monomial(g, ring, &s, BigInt::one()).sub(&GroupRingElement::one(g, ring));
            symbols[i][j] = s;
        }
    }
    let element = ring_det(&m, g, ring);
    let value = augmentation_analysis(&element, r)?;
    Ok(GrossRegulator { lattice, symbols, element, value })
}

#[derive(Clone, Debug)]
pub struct GrossReport {
    pub r: usize,
    pub cl_order: BigInt,
    pub classical_regulator: BigInt,
    pub precision: u32,
    pub theta: GroupRingElement,
    pub theta_form: AugmentationForm,
    pub regulator: GrossRegulator,
    /// Augmentation order of theta - |Cl| det, at least r + 1 when the
    /// congruence holds.
    pub difference_order: usize,
}

/// Checks theta in I^r and theta = |Cl_{k,S,T}| det mod I^{r+1}.
pub fn gross_congruence_check(datum: &ExtensionDatum, sets: &PlaceSets) -> Result<GrossReport> {
    gross_congruence_check_at(datum, sets, DEFAULT_PRECISION)
}

/// As `gross_congruence_check` with coefficients in Z/p^N, retrying once at
/// 2N when the precision is insufficient.
pub fn gross_congruence_check_at(datum: &ExtensionDatum, sets: &PlaceSets, n: u32) -> Result<GrossReport> {
    if n == 0 {
        return Err(Error::InvalidInput("precision must be positive".into()));
    }
    let mut precision = n;
    loop {
        match gross_at(datum, sets, precision) {
            Err(Error::Precision { .. }) | Err(Error::Inconclusive(_)) if precision == n => {
                precision *= 2;
            }
            other => return other,
        }
    }
}

fn gross_at(datum: &ExtensionDatum, sets: &PlaceSets, precision: u32) -> Result<GrossReport> {
    sets.validate(datum)?;
    let field = datum.field();
    let regulator = gross_regulator(datum, sets, precision)?;
    let r = regulator.lattice.rank();
    let ring = regulator.element.ring();
    let cl_order = cl_kst_order(field, sets)?;
    let classical = classical_regulator(&regulator.lattice)?;
    let theta = theta_element(datum, sets, None)?.theta.to_ring(ring);
    let theta_form = augmentation_analysis(&theta, r)?;
    if theta_form.order < r {
        return Err(Error::Inconsistency(format!("theta lies only in I^{} but r = {r}", theta_form.order)));
    }
    let diff = theta.sub(&regulator.element.scale(&cl_order));
    let dform = augmentation_analysis(&diff, r + 1)?;
    if dform.order < r + 1 {
        return Err(Error::Inconsistency(format!(
            "theta - |Cl| det lies only in I^{}, expected I^{}",
            dform.order,
            r + 1
        )));
    }
    Ok(GrossReport {
        r,
        cl_order,
        classical_regulator: classical,
        precision,
        theta,
        theta_form,
        regulator,
        difference_order: dform.order,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerMonomiality {
    pub order: usize,
    /// Coefficient of t^r, t = sigma - 1, modulo p^N.
    pub leading: String,
    /// v_p of that coefficient; None when it vanishes mod p^N.
    pub leading_valuation: Option<u32>,
    pub monomial: bool,
    /// Whether the regulator's leading coefficient is a unit, when
    /// computable.
    pub regulator_unit: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialityReport {
    pub r: usize,
    pub layers: Vec<LayerMonomiality>,
    pub monomial: bool,
    /// |Cl_{k,S,T}| prime to p, so the regulator decides monomiality.
    pub cl_prime_to_p: bool,
}

fn leading_at(form: &AugmentationForm, r: usize, p: u64) -> (BigInt, Option<u32>) {
    if form.order != r || form.leading_form.is_empty() {
        return (BigInt::zero(), None);
    }
    let c = form.leading_form[0].clone();
    let v = crate::intmat::p_valuation(&c, &BigInt::from(p));
    (c, v)
}

/// Monomiality of theta along cyclic p-power layers.
pub fn monomiality_test(layers: &[ExtensionDatum], sets: &PlaceSets) -> Result<MonomialityReport> {
    if layers.len() < 2 {
        return Err(Error::InvalidInput("need at least two layers".into()));
    }
    let field = layers[0].field();
    let p = field.p() as u64;
    let ring = CoefficientRing::ModPPower { p, n: DEFAULT_PRECISION };
    let r = sets.s().len() - 1;
    let cl = cl_kst_order(field, sets)?;
    let cl_prime_to_p = !(&cl % BigInt::from(p)).is_zero();
    let mut out = Vec::new();
    for d in layers {
        if d.group().rank() != 1 || !is_p_group(d.group(), p) {
            return Err(Error::InvalidInput("layers must be cyclic p-groups".into()));
        }
        let theta = theta_element(d, sets, None)?.theta.to_ring(ring);
        let form = augmentation_analysis(&theta, r)?;
        let (c, v) = leading_at(&form, r, p);
        let regulator_unit = gross_regulator(d, sets, DEFAULT_PRECISION)
            .ok()
            .map(|g| leading_at(&g.value, r, p).1 == Some(0));
        if cl_prime_to_p {
            if let Some(ru) = regulator_unit {
                if ru != (v == Some(0)) {
                    return Err(Error::Inconsistency("regulator and theta disagree on monomiality".into()));
                }
            }
        }
        out.push(LayerMonomiality {
            order: form.order,
            leading: c.to_string(),
            leading_valuation: v,
            monomial: form.order == r && v == Some(0),
            regulator_unit,
        });
    }
    let n = out.len();
    if out[n - 1].monomial != out[n - 2].monomial {
        return Err(Error::Inconclusive("monomiality is not stable across the last two layers".into()));
    }
    Ok(MonomialityReport { r, monomial: out[n - 1].monomial, layers: out, cl_prime_to_p })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AddedPlace {
    pub place: String,
    pub degree: u32,
    /// Frobenius in each supplied layer.
    pub frobenius: Vec<GElem>,
}

#[derive(Clone, Debug)]
pub struct Enlargement {
    pub sets: PlaceSets,
    pub added: Vec<AddedPlace>,
    pub gcd: u64,
}

/// Adds places of increasing degree, each with nontrivial Frobenius in
/// every layer, until the degrees in S have gcd 1. `budget` bounds the
/// degrees searched.
pub fn enlarge_s(sets: &PlaceSets, layers: &[ExtensionDatum], budget: u32) -> Result<Enlargement> {
    let field = match layers.first() {
        Some(d) => d.field().clone(),
        None => return Err(Error::InvalidInput("need at least one layer".into())),
    };
    let mut s = sets.s().clone();
    let mut gcd = cl_ks_order(sets);
    let mut added = Vec::new();
    'search: for d in 1..=budget {
        if gcd == 1 {
            break;
        }
        let mut cands = places_of_degree(&field, d);
        if d == 1 {
            cands.insert(0, Place::Infinity);
        }
        for v in cands {
            if gcd == 1 {
                break 'search;
            }
            if s.contains(&v) || sets.t().contains(&v) || gcd.gcd(&(d as u64)) == gcd {
                continue;
            }
            let frobs: Option<Vec<GElem>> = layers
                .iter()
                .map(|layer| layer.frobenius(&v).ok().filter(|f| !layer.group().is_zero(f)))
                .collect();
            let Some(frobs) = frobs else { continue };
            gcd = gcd.gcd(&(d as u64));
            added.push(AddedPlace { place: v.to_string(), degree: d, frobenius: frobs });
            s.insert(v);
        }
    }
    if gcd != 1 {
        return Err(Error::ResourceLimit(format!("no suitable places up to degree {budget}")));
    }
    Ok(Enlargement { sets: PlaceSets::new(s, sets.t().iter().cloned())?, added, gcd })
}
