//! Stickelberger series Theta_{K/k,S,T}(u) and elements theta = Theta(1).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::ExtensionDatum;
use crate::ffpoly::{places_of_degree, Place, Poly};
use crate::group::{AbelianGroup, GElem};
use crate::groupring::{CoefficientRing, GroupRingElement, GroupRingSeries};

const Z: CoefficientRing = CoefficientRing::Integers;

/// The sets S and T; infinity belongs to S, to T, or to the Euler product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceSets {
    s: BTreeSet<Place>,
    t: BTreeSet<Place>,
}

impl PlaceSets {
    pub fn new(s: impl IntoIterator<Item = Place>, t: impl IntoIterator<Item = Place>) -> Result<Self> {
        let s: BTreeSet<Place> = s.into_iter().collect();
        let t: BTreeSet<Place> = t.into_iter().collect();
        if s.is_empty() {
            return Err(Error::InvalidInput("S must be nonempty".into()));
        }
        if let Some(v) = s.intersection(&t).next() {
            return Err(Error::InvalidInput(format!("S and T share the place {v}")));
        }
        Ok(PlaceSets { s, t })
    }

    pub fn s(&self) -> &BTreeSet<Place> {
        &self.s
    }

    pub fn t(&self) -> &BTreeSet<Place> {
        &self.t
    }

    pub fn with_s(&self, s: impl IntoIterator<Item = Place>) -> Result<Self> {
        Self::new(s, self.t.iter().cloned())
    }

    pub fn with_t(&self, t: impl IntoIterator<Item = Place>) -> Result<Self> {
        Self::new(self.s.iter().cloned(), t)
    }

    /// Checks the sets against a datum: ramified places in S, T unramified.
    pub fn validate(&self, datum: &ExtensionDatum) -> Result<()> {
        for v in datum.ramified_places() {
            if !self.s.contains(&v) {
                return Err(Error::InvalidInput(format!("ramified place {v} is not in S")));
            }
        }
        Ok(())
    }
}

/// Which evaluation strategy produced a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaRoute {
    /// Sum over ideals grouped by residue class mod f.
    IdealSum,
    /// Place-by-place Euler product.
    EulerProduct,
}

fn shift_counts(group: &AbelianGroup, counts: &[BigInt], g: &GElem) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); counts.len()];
    for (i, c) in counts.iter().enumerate() {
        if !c.is_zero() {
            out[group.index(&group.add(&group.from_index(i), g))] += c;
        }
    }
    out
}

/// sum over monic a of degree n prime to f of [a], as dense counts.
fn monic_degree_counts(datum: &ExtensionDatum, n: usize) -> Vec<BigInt> {
    let group = datum.group();
    let size = group.order() as usize;
    let field = datum.field();
    let f = datum.modulus();
    let total = (field.q() as u64).pow(n as u32);
    let counts = (0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut acc, idx| {
                let a = Poly::monic_from_index(field.q(), n, idx);
                if a.gcd(f, field).deg() == 0 {
                    let g = datum.rec(&a, n as i64).expect("prime to f");
                    acc[group.index(&g)] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    counts.into_iter().map(BigInt::from).collect()
}

/// sum over all units x of (A/f)^x of rec(x, 0), as dense counts.
fn unit_sum_counts(datum: &ExtensionDatum) -> Vec<BigInt> {
    let group = datum.group();
    let mut counts = vec![BigInt::zero(); group.order() as usize];
    for x in datum.unit_group().units() {
        let g = datum.rec(&x, 0).expect("unit");
        counts[group.index(&g)] += 1;
    }
    counts
}

/// Z_f(u) = sum over monic a prime to f of [a] u^{deg a}, to degree `bound`.
pub(crate) fn ideal_sum_series(datum: &ExtensionDatum, bound: usize) -> GroupRingSeries {
    let group = datum.group();
    let q = BigInt::from(datum.field().q());
    let deg_f = datum.modulus().degree().unwrap();
    let u0 = unit_sum_counts(datum);
    let coeffs = (0..=bound)
        .map(|n| {
            let dense = if n < deg_f {
                monic_degree_counts(datum, n)
            } else {
                let scale = q.pow((n - deg_f) as u32);
                let shifted = shift_counts(group, &u0, &group.scale(datum.degree_image(), n as i64));
                shifted.into_iter().map(|c| c * &scale).collect()
            };
            GroupRingElement::from_dense(group, Z, &dense)
        })
        .collect();
    GroupRingSeries::from_coeffs(coeffs)
}

/// prod over finite places v prime to f of (1 - [v] u^{deg v})^{-1},
/// multiplied degree by degree in ascending order.
fn euler_product_series(datum: &ExtensionDatum, bound: usize) -> GroupRingSeries {
    let group = datum.group();
    let mut acc = GroupRingSeries::one(group, Z, bound);
    for d in 1..=bound {
        let places = places_of_degree(datum.field(), d as u32);
        let frobs: Vec<GElem> = places
            .par_iter()
            .filter(|v| datum.modulus().valuation(v.poly().unwrap(), datum.field()) == 0)
            .map(|v| datum.frobenius(v).expect("unramified"))
            .collect();
        for g in frobs {
            acc = acc.div_one_minus(&g, d);
        }
    }
    acc
}

/// Theta_{K/k,S,T}(u) truncated at u^bound.
pub fn theta_series(datum: &ExtensionDatum, sets: &PlaceSets, bound: usize) -> Result<GroupRingSeries> {
    theta_series_via(datum, sets, bound, ThetaRoute::IdealSum)
}

pub fn theta_series_via(
    datum: &ExtensionDatum,
    sets: &PlaceSets,
    bound: usize,
    route: ThetaRoute,
) -> Result<GroupRingSeries> {
    sets.validate(datum)?;
    for v in sets.t() {
        if datum.is_ramified(v) {
            return Err(Error::InvalidInput(format!("T contains the ramified place {v}")));
        }
    }
    let mut series = match route {
        ThetaRoute::IdealSum => ideal_sum_series(datum, bound),
        ThetaRoute::EulerProduct => euler_product_series(datum, bound),
    };
    // places dividing f outside S, and infinity outside S
    for p in datum.modulus_primes() {
        let v = Place::Finite(p);
        if !sets.s().contains(&v) {
            series = series.div_one_minus(&datum.frobenius(&v)?, v.degree() as usize);
        }
    }
    if !sets.s().contains(&Place::Infinity) {
        series = series.div_one_minus(&datum.frobenius(&Place::Infinity)?, 1);
    }
    // finite places of S prime to f were included in the product: remove
    for v in sets.s() {
        if let Place::Finite(p) = v {
            if datum.modulus().valuation(p, datum.field()) == 0 {
                series = series.mul_one_minus(&datum.frobenius(v)?, v.degree() as usize, &BigInt::one());
            }
        }
    }
    let q = BigInt::from(datum.field().q());
    for v in sets.t() {
        let d = v.degree();
        series = series.mul_one_minus(&datum.frobenius(v)?, d as usize, &q.pow(d));
    }
    Ok(series)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaResult {
    pub series: GroupRingSeries,
    pub polynomial_degree: usize,
    pub theta: GroupRingElement,
    pub stabilized: bool,
}

/// Default truncation 2 deg f + sum_T deg v + |S| + 4.
pub fn default_bound(datum: &ExtensionDatum, sets: &PlaceSets) -> usize {
    let deg_f = datum.modulus().degree().unwrap();
    let t: u32 = sets.t().iter().map(|v| v.degree()).sum();
    2 * deg_f + t as usize + sets.s().len() + 4
}

/// Detects Theta as a polynomial and returns theta = Theta(1).
pub fn theta_element(datum: &ExtensionDatum, sets: &PlaceSets, degree_hint: Option<usize>) -> Result<ThetaResult> {
    let d0 = degree_hint.unwrap_or_else(|| default_bound(datum, sets));
    let mut last = None;
    for bound in [d0, 2 * d0] {
        let series = theta_series(datum, sets, bound)?;
        let b = series.degree().unwrap_or(0);
        if b + 3 > bound {
            last = Some(series);
            continue;
        }
        // confirm the tail vanishes out to 2B
        let checked = if bound >= 2 * b { series.clone() } else { theta_series(datum, sets, 2 * b)? };
        if checked.degree().unwrap_or(0) != b {
            last = Some(checked);
            continue;
        }
        let poly = series.truncate(b);
        let theta = poly.eval_at_one();
        return Ok(ThetaResult { series: poly, polynomial_degree: b, theta, stabilized: true });
    }
    let partial = last.map_or_else(Vec::new, |s| s.coeffs().iter().map(|c| c.to_string()).collect());
    Err(Error::PolynomialityNotDetected { bound: 2 * d0, partial })
}

#[derive(Clone, Debug)]
pub struct FunctorialityReport {
    pub theta: GroupRingElement,
    pub projected: GroupRingElement,
    pub theta_quotient: GroupRingElement,
}

/// Checks pr(theta_K) = theta_{K^H}.
pub fn check_functoriality(datum: &ExtensionDatum, h: &[GElem], sets: &PlaceSets) -> Result<FunctorialityReport> {
    let quotient = datum.quotient_datum(h)?;
    let proj = datum.quotient_map(h)?;
    let theta = theta_element(datum, sets, None)?.theta;
    let theta_quotient = theta_element(&quotient, sets, None)?.theta;
    let projected = theta.project(&proj)?;
    if projected != theta_quotient {
        return Err(Error::Inconsistency(format!(
            "projection of theta {projected} differs from theta of the quotient {theta_quotient}"
        )));
    }
    Ok(FunctorialityReport { theta, projected, theta_quotient })
}

/// (1 - g).
fn one_minus(group: &AbelianGroup, g: &GElem) -> GroupRingElement {
    GroupRingElement::one(group, Z).sub(&GroupRingElement::monomial(group, Z, g, BigInt::one()))
}

/// delta = prod over unramified v in S of (1 - [v]); in the constant
/// branch one factor (1 - Fr^m) is replaced by 1 + Fr + ... + Fr^{m-1}.
pub fn delta_factor(layer: &ExtensionDatum, s: &BTreeSet<Place>, constant_branch: bool) -> Result<GroupRingElement> {
    let group = layer.group();
    let mut s0 = Vec::new();
    for v in s {
        if layer.is_ramified(v) {
            continue;
        }
        let f = layer.frobenius(v)?;
        if group.is_zero(&f) {
            return Err(Error::SplitsCompletely(format!("{v} splits completely")));
        }
        s0.push((v.clone(), f));
    }
    let mut delta = GroupRingElement::one(group, Z);
    let mut skip_first = false;
    if constant_branch {
        let fr = layer.degree_image();
        for (v, f) in &s0 {
            if *f != group.scale(fr, v.degree() as i64) {
                return Err(Error::InvalidInput(format!("[{v}] is not Fr^deg v")));
            }
        }
        let Some((v, _)) = s0.first() else {
            return Err(Error::InvalidInput("constant branch needs an unramified place in S".into()));
        };
        let mut geo = GroupRingElement::zero(group, Z);
        for i in 0..v.degree() {
            geo = geo.add(&GroupRingElement::monomial(group, Z, &group.scale(fr, i as i64), BigInt::one()));
        }
        delta = geo;
        skip_first = true;
    }
    for (i, (_, f)) in s0.iter().enumerate() {
        if skip_first && i == 0 {
            continue;
        }
        delta = delta.mul(&one_minus(group, f));
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::{enumerate_places, FieldSpec};
    use proptest::prelude::*;

    fn fld(p: u32) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn pl(s: &str, f: &FieldSpec) -> Place {
        Place::parse(s, f).unwrap()
    }

    fn ints(s: &GroupRingSeries) -> Vec<BigInt> {
        s.coeffs().iter().map(|c| c.augmentation()).collect()
    }

    #[test]
    fn trivial_datum_examples() {
        let f = fld(2);
        let d = ExtensionDatum::trivial(&f);
        let sets = PlaceSets::new([Place::Infinity], [pl("T", &f)]).unwrap();
        let s = theta_series(&d, &sets, 6).unwrap();
        assert_eq!(ints(&s), [1, 0, 0, 0, 0, 0, 0].map(BigInt::from));
        assert_eq!(theta_element(&d, &sets, None).unwrap().theta, GroupRingElement::one(d.group(), Z));

        let sets = PlaceSets::new([Place::Infinity, pl("T", &f)], [pl("T+1", &f)]).unwrap();
        let s = theta_series(&d, &sets, 6).unwrap();
        assert_eq!(ints(&s), [1, -1, 0, 0, 0, 0, 0].map(BigInt::from));
        assert!(theta_element(&d, &sets, None).unwrap().theta.is_zero());

        let sets = PlaceSets::new([Place::Infinity], []).unwrap();
        assert!(matches!(theta_element(&d, &sets, None), Err(Error::PolynomialityNotDetected { .. })));
    }

    #[test]
    fn constant_quadratic() {
        let f = fld(2);
        let d = ExtensionDatum::constant(&f, 2).unwrap();
        let sets = PlaceSets::new([Place::Infinity], [pl("T", &f)]).unwrap();
        let r = theta_element(&d, &sets, Some(8)).unwrap();
        assert_eq!(r.theta.augmentation(), BigInt::one());
        let all: Vec<GElem> = d.group().elements().collect();
        check_functoriality(&d, &all, &sets).unwrap();
    }

    #[test]
    fn functoriality_examples() {
        let f = fld(2);
        let c = ExtensionDatum::carlitz(&f, &Poly::parse("T^2+T+1", 'T', &f).unwrap()).unwrap();
        let sets = PlaceSets::new([Place::Infinity, pl("T^2+T+1", &f)], [pl("T", &f)]).unwrap();
        check_functoriality(&c, &[c.group().zero()], &sets).unwrap();
        let d4 = ExtensionDatum::constant(&f, 4).unwrap();
        let sets = PlaceSets::new([Place::Infinity], [pl("T", &f)]).unwrap();
        check_functoriality(&d4, &[vec![0], vec![2]], &sets).unwrap();
    }

    #[test]
    fn ramified_place_outside_s_is_rejected() {
        let f = fld(3);
        let c = ExtensionDatum::carlitz(&f, &Poly::parse("T", 'T', &f).unwrap()).unwrap();
        let sets = PlaceSets::new([Place::Infinity], [pl("T+1", &f)]).unwrap();
        assert!(theta_series(&c, &sets, 4).is_err());
        assert!(PlaceSets::new([Place::Infinity], [Place::Infinity]).is_err());
        assert!(PlaceSets::new([], [Place::Infinity]).is_err());
    }

    #[test]
    fn delta_examples() {
        let f = fld(2);
        let layer = ExtensionDatum::constant(&f, 4).unwrap();
        let g = layer.group();
        let one = GroupRingElement::one(g, Z);
        let s1: BTreeSet<Place> = [pl("T", &f)].into();
        assert_eq!(delta_factor(&layer, &s1, true).unwrap(), one);
        let s2: BTreeSet<Place> = [pl("T^2+T+1", &f)].into();
        let expect = one.add(&GroupRingElement::monomial(g, Z, &vec![1], BigInt::one()));
        assert_eq!(delta_factor(&layer, &s2, true).unwrap(), expect);
        let s4: BTreeSet<Place> = [Place::Finite(Poly::parse("T^4+T+1", 'T', &f).unwrap())].into();
        assert!(matches!(delta_factor(&layer, &s4, true), Err(Error::SplitsCompletely(_))));
        let c = ExtensionDatum::carlitz(&f, &Poly::parse("T^3", 'T', &f).unwrap()).unwrap();
        let s: BTreeSet<Place> = [Place::Infinity, pl("T", &f)].into();
        // infinity is unramified with trivial Frobenius here only if D = 0
        assert!(matches!(delta_factor(&c, &s, false), Err(Error::SplitsCompletely(_))));
        let s: BTreeSet<Place> = [pl("T", &f)].into();
        assert_eq!(delta_factor(&c, &s, false).unwrap(), GroupRingElement::one(c.group(), Z));
    }

    fn corpus() -> Vec<(ExtensionDatum, PlaceSets)> {
        let mut out = Vec::new();
        for p in [2u32, 3] {
            let f = fld(p);
            for deg in 1..=3usize {
                for v in places_of_degree(&f, deg as u32).into_iter().take(2) {
                    let m = v.poly().unwrap().clone();
                    let d = ExtensionDatum::carlitz(&f, &m).unwrap();
                    let t = enumerate_places(&f, 2, false)
                        .unwrap()
                        .into_iter()
                        .find(|w| *w != v)
                        .unwrap();
                    out.push((d, PlaceSets::new([Place::Infinity, v.clone()], [t]).unwrap()));
                }
            }
            for m in [2u64, 3, 5, 8] {
                let d = ExtensionDatum::constant(&f, m).unwrap();
                out.push((d, PlaceSets::new([Place::Infinity], [pl("T", &f)]).unwrap()));
            }
        }
        out
    }

    #[test]
    fn corpus_is_polynomial_and_routes_agree() {
        for (d, sets) in corpus() {
            let r = theta_element(&d, &sets, None).unwrap();
            assert!(r.stabilized);
            let b = r.polynomial_degree;
            let long = theta_series(&d, &sets, 2 * b + 2).unwrap();
            assert_eq!(long.degree().unwrap_or(0), b);
            let bound = (b + 2).min(7);
            let euler = theta_series_via(&d, &sets, bound, ThetaRoute::EulerProduct).unwrap();
            assert_eq!(euler, long.truncate(bound), "{:?}", d.modulus());
        }
    }

    #[test]
    fn removing_an_unramified_place_from_s() {
        // theta_S = (1 - [v]) theta_{S \ v}
        let f = fld(3);
        let c = ExtensionDatum::carlitz(&f, &Poly::parse("T^2+1", 'T', &f).unwrap()).unwrap();
        let base: Vec<Place> = vec![Place::Infinity, pl("T^2+1", &f)];
        let t = [pl("T", &f)];
        let small = theta_element(&c, &PlaceSets::new(base.clone(), t.clone()).unwrap(), None).unwrap().theta;
        for v in [pl("T+1", &f), pl("T^2+T+2", &f)] {
            let mut s = base.clone();
            s.push(v.clone());
            let big = theta_element(&c, &PlaceSets::new(s, t.clone()).unwrap(), None).unwrap().theta;
            let fv = c.frobenius(&v).unwrap();
            assert_eq!(big, one_minus(c.group(), &fv).mul(&small));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn functoriality_on_random_subgroups(pick in 0usize..64, which in 0usize..3) {
            let f = fld(3);
            let m = ["T^3", "T^2+T", "T^2+1"][which];
            let d = ExtensionDatum::carlitz(&f, &Poly::parse(m, 'T', &f).unwrap()).unwrap();
            let g = d.group();
            let h = g.from_index(pick % g.order() as usize);
            let sub: Vec<GElem> = g.closure(&[h]).into_iter().map(|i| g.from_index(i)).collect();
            let mut s: Vec<Place> = d.modulus_primes().into_iter().map(Place::Finite).collect();
            s.push(Place::Infinity);
            let t = enumerate_places(&f, 1, false).unwrap().into_iter().find(|v| !s.contains(v)).unwrap();
            let sets = PlaceSets::new(s, [t]).unwrap();
            prop_assert!(check_functoriality(&d, &sub, &sets).is_ok());
        }
    }
}
