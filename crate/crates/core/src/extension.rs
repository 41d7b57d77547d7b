//! Finite abelian extensions of k = F_q(T) in the ray class model.
//!
//! A datum is a surjection rec: (A/f)^x x Z -> G. The Z factor is the
//! degree, with rec(1, 1) the Frobenius at infinity whenever infinity is
//! unramified. For a monic irreducible P prime to f, [P] = rec(P mod f, deg P).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffpoly::{ord_at, FieldSpec, Place, Poly, RationalFunction};
use crate::group::{from_relations, quotient, AbelianGroup, GElem};
use crate::units::UnitGroup;

#[derive(Clone, Debug)]
pub struct ExtensionDatum {
    field: FieldSpec,
    modulus: Poly,
    infinity_tame: bool,
    group: AbelianGroup,
    units: Arc<UnitGroup>,
    unit_images: Vec<GElem>,
    degree_image: GElem,
}

impl PartialEq for ExtensionDatum {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field
            && self.modulus == o.modulus
            && self.infinity_tame == o.infinity_tame
            && self.group == o.group
            && self.unit_images == o.unit_images
            && self.degree_image == o.degree_image
    }
}

/// Factorisation data of the modulus at one place.
struct LocalFactor {
    prime_power: Poly,
    cofactor: Poly,
}

impl ExtensionDatum {
    pub fn new(
        field: &FieldSpec,
        modulus: Poly,
        infinity_tame: bool,
        group: AbelianGroup,
        unit_images: Vec<GElem>,
        degree_image: GElem,
    ) -> Result<Self> {
        let units = Arc::new(UnitGroup::new(field, &modulus)?);
        Self::with_units(field, units, infinity_tame, group, unit_images, degree_image)
    }

    fn with_units(
        field: &FieldSpec,
        units: Arc<UnitGroup>,
        infinity_tame: bool,
        group: AbelianGroup,
        mut unit_images: Vec<GElem>,
        mut degree_image: GElem,
    ) -> Result<Self> {
        let ug = units.group();
        if unit_images.len() != ug.rank() {
            return Err(Error::InvalidInput(format!(
                "expected {} unit images, got {}",
                ug.rank(),
                unit_images.len()
            )));
        }
        for g in unit_images.iter_mut().chain(std::iter::once(&mut degree_image)) {
            if g.len() != group.rank() {
                return Err(Error::InvalidInput("image has wrong length".into()));
            }
            group.normalize(g);
        }
        for (img, &d) in unit_images.iter().zip(ug.divisors()) {
            if !group.is_zero(&group.scale(img, d as i64)) {
                return Err(Error::InvalidInput("reciprocity images violate unit relations".into()));
            }
        }
        let mut gens = unit_images.clone();
        gens.push(degree_image.clone());
        if group.closure(&gens).len() as u64 != group.order() {
            return Err(Error::InvalidInput("reciprocity map is not surjective".into()));
        }
        let datum = ExtensionDatum {
            field: field.clone(),
            modulus: units.modulus().clone(),
            infinity_tame,
            group,
            units,
            unit_images,
            degree_image,
        };
        if !infinity_tame && !datum.constants_image().iter().all(|g| datum.group.is_zero(g)) {
            return Err(Error::InvalidInput(
                "constants must map trivially when infinity is unramified".into(),
            ));
        }
        Ok(datum)
    }

    /// The trivial extension k/k.
    pub fn trivial(field: &FieldSpec) -> Self {
        Self::new(field, Poly::one(), false, AbelianGroup::trivial(), vec![], vec![]).unwrap()
    }

    /// The constant field extension of degree m.
    pub fn constant(field: &FieldSpec, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("degree must be positive".into()));
        }
        let g = AbelianGroup::cyclic(m);
        let d = if m == 1 { vec![] } else { vec![1] };
        Self::new(field, Poly::one(), false, g, vec![], d)
    }

    /// The Carlitz cyclotomic extension k(Lambda_f) with G = (A/f)^x.
    pub fn carlitz(field: &FieldSpec, f: &Poly) -> Result<Self> {
        let units = Arc::new(UnitGroup::new(field, f)?);
        let g = units.group().clone();
        let images = (0..g.rank()).map(|i| g.basis(i)).collect();
        let zero = g.zero();
        Self::with_units(field, units, true, g, images, zero)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn infinity_tame(&self) -> bool {
        self.infinity_tame
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn unit_group(&self) -> &UnitGroup {
        &self.units
    }

    pub fn unit_images(&self) -> &[GElem] {
        &self.unit_images
    }

    pub fn degree_image(&self) -> &GElem {
        &self.degree_image
    }

    pub fn degree(&self) -> u64 {
        self.group.order()
    }

    /// rec(x mod f, d); x must be prime to f.
    pub fn rec(&self, x: &Poly, d: i64) -> Result<GElem> {
        let c = self.units.dlog(x)?;
        Ok(self.rec_coords(&c, d))
    }

    fn rec_coords(&self, c: &[i64], d: i64) -> GElem {
        let mut acc = self.group.scale(&self.degree_image, d);
        for (&ci, img) in c.iter().zip(&self.unit_images) {
            acc = self.group.add(&acc, &self.group.scale(img, ci));
        }
        acc
    }

    /// Image of F_q^x under rec(-, 0).
    fn constants_image(&self) -> Vec<GElem> {
        if self.field.q() == 2 {
            return vec![];
        }
        let c = Poly::constant(self.field.primitive_element());
        vec![self.rec(&c, 0).expect("constants are units")]
    }

    fn local_factor(&self, p: &Poly) -> Option<LocalFactor> {
        let a = self.modulus.valuation(p, &self.field);
        if a == 0 {
            return None;
        }
        let prime_power = p.pow(a, &self.field);
        let cofactor = self.modulus.div_rem(&prime_power, &self.field).unwrap().0;
        Some(LocalFactor { prime_power, cofactor })
    }

    /// x with x = a mod m1, x = b mod m2 (m1, m2 coprime).
    fn crt(&self, a: &Poly, m1: &Poly, b: &Poly, m2: &Poly) -> Poly {
        let f = &self.field;
        if m2.deg() == 0 {
            return a.rem(m1, f);
        }
        let inv = m1.inv_mod(m2, f).expect("coprime moduli");
        let t = b.sub(a, f).mul_mod(&inv, m2, f);
        a.add(&m1.mul(&t, f), f).rem(&m1.mul(m2, f), f)
    }

    /// Generators of the inertia group at v.
    pub fn inertia(&self, v: &Place) -> Vec<GElem> {
        let gens: Vec<GElem> = match v {
            Place::Infinity => {
                if self.infinity_tame {
                    self.constants_image()
                } else {
                    vec![]
                }
            }
            Place::Finite(p) => match self.local_factor(p) {
                None => vec![],
                Some(lf) => self
                    .units
                    .generators()
                    .iter()
                    .map(|g| {
                        let e = self.crt(g, &lf.prime_power, &Poly::one(), &lf.cofactor);
                        self.rec(&e, 0).expect("unit")
                    })
                    .collect(),
            },
        };
        gens.into_iter().filter(|g| !self.group.is_zero(g)).collect()
    }

    /// Sorted element indices of the inertia subgroup.
    pub fn inertia_subgroup(&self, v: &Place) -> Vec<usize> {
        self.group.closure(&self.inertia(v))
    }

    pub fn is_ramified(&self, v: &Place) -> bool {
        !self.inertia(v).is_empty()
    }

    /// Places with nontrivial inertia.
    pub fn ramified_places(&self) -> Vec<Place> {
        let mut out = Vec::new();
        if self.is_ramified(&Place::Infinity) {
            out.push(Place::Infinity);
        }
        for p in self.modulus_primes() {
            let v = Place::Finite(p);
            if self.is_ramified(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Monic irreducible divisors of the modulus, ascending.
    pub fn modulus_primes(&self) -> Vec<Poly> {
        let f = &self.field;
        let mut rest = self.modulus.clone();
        let mut out = Vec::new();
        let mut d = 1u32;
        while rest.deg() > 0 {
            if 2 * d as i64 > rest.deg() {
                out.push(rest.clone());
                break;
            }
            for pl in crate::ffpoly::places_of_degree(f, d) {
                let p = pl.poly().unwrap().clone();
                if rest.valuation(&p, f) > 0 {
                    while rest.valuation(&p, f) > 0 {
                        rest = rest.div_rem(&p, f).unwrap().0;
                    }
                    out.push(p);
                }
            }
            d += 1;
        }
        out.sort();
        out
    }

    /// The Frobenius [v] in G.
    pub fn frobenius(&self, v: &Place) -> Result<GElem> {
        if self.is_ramified(v) {
            return Err(Error::Ramified(v.to_string()));
        }
        Ok(self.frobenius_lift(v))
    }

    /// A Frobenius element at v, well defined modulo inertia.
    pub fn frobenius_lift(&self, v: &Place) -> GElem {
        match v {
            Place::Infinity => self.degree_image.clone(),
            Place::Finite(p) => {
                let d = p.degree().unwrap() as i64;
                match self.local_factor(p) {
                    None => self.rec(p, d).expect("prime to f"),
                    Some(lf) => {
                        let e = self.crt(&Poly::one(), &lf.prime_power, p, &lf.cofactor);
                        self.rec(&e, d).expect("unit")
                    }
                }
            }
        }
    }

    /// Ramification index, residue degree and number of places above v.
    pub fn decomposition(&self, v: &Place) -> (u64, u64, u64) {
        let inertia = self.inertia(v);
        let e = self.group.closure(&inertia).len() as u64;
        let mut gens = inertia;
        gens.push(self.frobenius_lift(v));
        let dv = self.group.closure(&gens).len() as u64;
        let f = dv / e;
        (e, f, self.group.order() / dv)
    }

    /// Degree of the constant field of K over F_q.
    pub fn constant_field_degree(&self) -> u64 {
        self.group.order() / self.group.closure(&self.unit_images).len() as u64
    }

    /// Local reciprocity symbol at v, normalised so that a uniformiser at
    /// an unramified place maps to [v]^{-1}. Sums to zero over all places
    /// for x in k^x.
    pub fn local_symbol(&self, v: &Place, x: &RationalFunction) -> Result<GElem> {
        let fld = &self.field;
        let m = ord_at(v, x, fld)?;
        match v {
            Place::Infinity => {
                let c = Poly::constant(x.sign(fld));
                let rc = self.rec(&c, 0)?;
                Ok(self.group.sub(&self.group.scale(&self.degree_image, -m), &rc))
            }
            Place::Finite(p) => match self.local_factor(p) {
                None => Ok(self.group.scale(&self.frobenius(v)?, -m)),
                Some(lf) => {
                    let d = p.degree().unwrap() as i64;
                    let e_hat = self.crt(&Poly::one(), &lf.prime_power, p, &lf.cofactor);
                    let pi = self.rec(&e_hat, d)?;
                    // unit part u = x / P^m reduced mod P^a
                    let strip = |g: &Poly, k: u32| -> Poly {
                        let mut g = g.clone();
                        for _ in 0..k {
                            g = g.div_rem(p, fld).unwrap().0;
                        }
                        g
                    };
                    let num = strip(&x.num, x.num.valuation(p, fld));
                    let den = strip(&x.den, x.den.valuation(p, fld));
                    let pa = &lf.prime_power;
                    let u = num.mul_mod(&den.inv_mod(pa, fld).expect("unit"), pa, fld);
                    let e_u = self.crt(&u, pa, &Poly::one(), &lf.cofactor);
                    let ru = self.rec(&e_u, 0)?;
                    Ok(self.group.add(&self.group.scale(&pi, -m), &ru))
                }
            },
        }
    }

    /// The datum of the fixed field K^H.
    pub fn quotient_datum(&self, h: &[GElem]) -> Result<ExtensionDatum> {
        let mut h: Vec<GElem> = h.to_vec();
        for g in h.iter_mut() {
            if g.len() != self.group.rank() {
                return Err(Error::InvalidInput("subgroup element has wrong length".into()));
            }
            self.group.normalize(g);
        }
        if !self.group.is_subgroup(&h) {
            return Err(Error::InvalidInput("H is not closed under the group law".into()));
        }
        let (q, proj) = quotient(&self.group, &h)?;
        let images = self.unit_images.iter().map(|g| proj.apply(g)).collect();
        let d = proj.apply(&self.degree_image);
        Self::with_units(&self.field, self.units.clone(), self.infinity_tame, q, images, d)
    }

    /// Projection G -> G/H matching `quotient_datum`.
    pub fn quotient_map(&self, h: &[GElem]) -> Result<crate::group::Projection> {
        Ok(quotient(&self.group, h)?.1)
    }

    /// Compositum with the constant extension of degree m (G x Z/m).
    pub fn compositum_with_constant(&self, m: u64) -> Result<ExtensionDatum> {
        let r = self.group.rank();
        let mut rel: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut v = vec![0; r + 1];
                v[i] = self.group.divisors()[i] as i64;
                v
            })
            .collect();
        let mut last = vec![0; r + 1];
        last[r] = m as i64;
        rel.push(last);
        let (g, proj, _) = from_relations(r + 1, &rel)?;
        let lift = |x: &GElem, c: i64| {
            let mut v = x.clone();
            v.push(c);
            proj.apply(&v)
        };
        let images = self.unit_images.iter().map(|x| lift(x, 0)).collect();
        let d = lift(&self.degree_image, 1);
        Self::with_units(&self.field, self.units.clone(), self.infinity_tame, g, images, d)
    }

    /// Projection of the compositum group onto its two factors.
    pub fn compositum_factors(&self, m: u64) -> Result<(AbelianGroup, Vec<GElem>, Vec<GElem>)> {
        // generators of the compositum group expressed in (G, Z/m)
        let comp = self.compositum_with_constant(m)?;
        let r = self.group.rank();
        let mut rel: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut v = vec![0; r + 1];
                v[i] = self.group.divisors()[i] as i64;
                v
            })
            .collect();
        let mut last = vec![0; r + 1];
        last[r] = m as i64;
        rel.push(last);
        let (_, _, lifts) = from_relations(r + 1, &rel)?;
        let left = lifts.iter().map(|l| { let mut x = l[..r].to_vec(); self.group.normalize(&mut x); x }).collect();
        let right = lifts.iter().map(|l| vec![l[r].rem_euclid(m as i64)]).collect();
        Ok((comp.group.clone(), left, right))
    }

    pub fn to_config(&self) -> DatumConfig {
        DatumConfig {
            p: self.field.p(),
            e: self.field.e(),
            modulus: self.modulus.to_string(),
            infinity_tame: self.infinity_tame,
            elementary_divisors: self.group.divisors().to_vec(),
            unit_generators: self.units.generators().iter().map(|g| g.to_string()).collect(),
            unit_images: self.unit_images.clone(),
            degree_image: self.degree_image.clone(),
        }
    }

    pub fn from_config(c: &DatumConfig) -> Result<Self> {
        let field = FieldSpec::new(c.p, c.e)?;
        let modulus = Poly::parse(&c.modulus, 'T', &field)?;
        let units = Arc::new(UnitGroup::new(&field, &modulus)?);
        let gens: Vec<String> = units.generators().iter().map(|g| g.to_string()).collect();
        if gens != c.unit_generators {
            return Err(Error::InvalidInput(format!(
                "unit generators {:?} do not match the canonical choice {gens:?}",
                c.unit_generators
            )));
        }
        let group = AbelianGroup::new(c.elementary_divisors.clone())?;
        Self::with_units(&field, units, c.infinity_tame, group, c.unit_images.clone(), c.degree_image.clone())
    }
}

/// Serialized form of an extension datum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatumConfig {
    pub p: u32,
    pub e: u32,
    pub modulus: String,
    pub infinity_tame: bool,
    pub elementary_divisors: Vec<u64>,
    pub unit_generators: Vec<String>,
    pub unit_images: Vec<Vec<i64>>,
    pub degree_image: Vec<i64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::enumerate_places;
    use proptest::prelude::*;

    fn fld(p: u32) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn poly(s: &str, f: &FieldSpec) -> Poly {
        Poly::parse(s, 'T', f).unwrap()
    }

    fn place(s: &str, f: &FieldSpec) -> Place {
        Place::parse(s, f).unwrap()
    }

    #[test]
    fn trivial_datum() {
        let f = fld(3);
        let d = ExtensionDatum::trivial(&f);
        for v in enumerate_places(&f, 2, true).unwrap() {
            assert!(d.group().is_zero(&d.frobenius(&v).unwrap()));
            assert!(d.inertia(&v).is_empty());
        }
    }

    #[test]
    fn carlitz_over_f3() {
        let f = fld(3);
        let d = ExtensionDatum::carlitz(&f, &poly("T", &f)).unwrap();
        assert_eq!(d.group().order(), 2);
        assert!(d.group().is_zero(&d.frobenius(&place("T+1", &f)).unwrap()));
        assert!(!d.group().is_zero(&d.frobenius(&place("T+2", &f)).unwrap()));
        assert_eq!(d.inertia_subgroup(&place("T", &f)).len(), 2);
        assert!(d.inertia(&place("T+1", &f)).is_empty());
        assert!(matches!(d.frobenius(&place("T", &f)), Err(Error::Ramified(_))));
        assert_eq!(d.ramified_places(), vec![Place::Infinity, place("T", &f)]);
    }

    #[test]
    fn quotients() {
        let f = fld(2);
        let d = ExtensionDatum::carlitz(&f, &poly("T^2+T+1", &f)).unwrap();
        assert_eq!(d.group().order(), 3);
        let all: Vec<GElem> = d.group().elements().collect();
        let t = d.quotient_datum(&all).unwrap();
        assert!(t.group().is_trivial());
        let same = d.quotient_datum(&[d.group().zero()]).unwrap();
        for v in enumerate_places(&f, 4, true).unwrap() {
            if !d.is_ramified(&v) {
                assert_eq!(same.frobenius(&v).unwrap(), d.frobenius(&v).unwrap());
            }
        }
        let d4 = ExtensionDatum::carlitz(&f, &poly("T^4", &f)).unwrap();
        assert_eq!(d4.group().divisors(), &[2, 4]);
        assert!(d4.quotient_datum(&[vec![0, 1]]).is_err());
    }

    #[test]
    fn constant_extension_frobenius_is_degree() {
        let f = fld(2);
        let d = ExtensionDatum::constant(&f, 4).unwrap();
        for v in enumerate_places(&f, 4, true).unwrap() {
            assert_eq!(d.frobenius(&v).unwrap(), vec![(v.degree() % 4) as i64]);
        }
    }

    #[test]
    fn config_round_trip() {
        let f = fld(3);
        let d = ExtensionDatum::carlitz(&f, &poly("T^2+1", &f)).unwrap().compositum_with_constant(3).unwrap();
        let c = d.to_config();
        let s = serde_json::to_string(&c).unwrap();
        let back: DatumConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert_eq!(ExtensionDatum::from_config(&back).unwrap(), d);
    }

    #[test]
    fn validation() {
        let f = fld(3);
        // constants must die when infinity is declared unramified
        let u = UnitGroup::new(&f, &poly("T", &f)).unwrap();
        assert_eq!(u.group().order(), 2);
        let g = AbelianGroup::cyclic(2);
        assert!(ExtensionDatum::new(&f, poly("T", &f), false, g.clone(), vec![vec![1]], vec![0]).is_err());
        assert!(ExtensionDatum::new(&f, poly("T", &f), true, g.clone(), vec![vec![1]], vec![0]).is_ok());
        // not surjective
        assert!(ExtensionDatum::new(&f, poly("T", &f), true, g, vec![vec![0]], vec![0]).is_err());
    }

    fn factor(a: &Poly, f: &FieldSpec) -> Vec<(Place, i64)> {
        let mut out = vec![];
        let deg = a.degree().unwrap() as u32;
        if deg == 0 {
            return out;
        }
        for v in enumerate_places(f, deg, false).unwrap() {
            let k = a.valuation(v.poly().unwrap(), f);
            if k > 0 {
                out.push((v, k as i64));
            }
        }
        out
    }

    fn sample_data() -> Vec<ExtensionDatum> {
        let f2 = fld(2);
        let f3 = fld(3);
        vec![
            ExtensionDatum::carlitz(&f3, &poly("T^2+T", &f3)).unwrap(),
            ExtensionDatum::carlitz(&f2, &poly("T^3+T", &f2)).unwrap().compositum_with_constant(2).unwrap(),
            ExtensionDatum::carlitz(&f3, &poly("T^3", &f3)).unwrap(),
            ExtensionDatum::carlitz(&f2, &poly("T^4", &f2)).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn product_formula(which in 0usize..4, num in 1u64..400, den in 1u64..400, c in 1u32..3) {
            let d = &sample_data()[which];
            let f = d.field();
            let q = f.q();
            let num = Poly::from_code(q, num).scale(c % q.max(2), f);
            let den = Poly::from_code(q, den);
            prop_assume!(!num.is_zero());
            let x = RationalFunction::new(num.clone(), den.clone()).unwrap();
            let mut places: Vec<Place> = factor(&num, f).into_iter().chain(factor(&den, f)).map(|p| p.0).collect();
            places.extend(d.modulus_primes().into_iter().map(Place::Finite));
            places.push(Place::Infinity);
            places.sort();
            places.dedup();
            let mut total = d.group().zero();
            for v in &places {
                total = d.group().add(&total, &d.local_symbol(v, &x).unwrap());
            }
            prop_assert!(d.group().is_zero(&total));
        }

        #[test]
        fn artin_reciprocity_on_monic_polys(which in 0usize..4, code in 1u64..1000) {
            let d = &sample_data()[which];
            let f = d.field();
            let q = f.q() as u64;
            let deg = (1..).find(|&k| q.pow(k) > code).unwrap() as usize;
            let a = Poly::monic_from_index(f.q(), deg, code % q.pow(deg as u32));
            prop_assume!(a.gcd(d.modulus(), f).deg() == 0);
            let mut acc = d.group().zero();
            for (v, k) in factor(&a, f) {
                acc = d.group().add(&acc, &d.group().scale(&d.frobenius(&v).unwrap(), k));
            }
            prop_assert_eq!(acc, d.rec(&a, deg as i64).unwrap());
        }

        #[test]
        fn frobenius_commutes_with_projection(which in 0usize..4, pick in 0usize..64) {
            let d = &sample_data()[which];
            let g = d.group();
            let h = g.from_index(pick % g.order() as usize);
            let sub: Vec<GElem> = g.closure(&[h.clone()]).into_iter().map(|i| g.from_index(i)).collect();
            let qd = d.quotient_datum(&sub).unwrap();
            let proj = d.quotient_map(&sub).unwrap();
            for v in enumerate_places(d.field(), 4, true).unwrap() {
                if !d.is_ramified(&v) {
                    prop_assert_eq!(qd.frobenius(&v).unwrap(), proj.apply(&d.frobenius(&v).unwrap()));
                }
            }
        }
    }
}
