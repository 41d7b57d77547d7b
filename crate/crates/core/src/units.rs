//! The unit group (A/f)^x of A = F_q[T], by enumeration.

use crate::error::{Error, Result};
use crate::ffpoly::{FieldSpec, Poly};
use crate::group::{from_relations, AbelianGroup, GElem};

/// Enumeration bound on q^{deg f}.
pub const MAX_RESIDUES: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct UnitGroup {
    field: FieldSpec,
    modulus: Poly,
    generators: Vec<Poly>,
    group: AbelianGroup,
    /// residue code -> element index in `group`, u32::MAX for non-units
    table: Vec<u32>,
}

const NON_UNIT: u32 = u32::MAX;

impl UnitGroup {
    pub fn new(field: &FieldSpec, modulus: &Poly) -> Result<Self> {
        if modulus.is_zero() || !modulus.is_monic() {
            return Err(Error::InvalidInput(format!("modulus {modulus} must be monic")));
        }
        let d = modulus.degree().unwrap();
        let q = field.q() as u64;
        let n = q.checked_pow(d as u32).filter(|&n| n <= MAX_RESIDUES).ok_or_else(|| {
            Error::ResourceLimit(format!("q^deg f exceeds {MAX_RESIDUES} for modulus {modulus}"))
        })?;
        if d == 0 {
            return Ok(UnitGroup {
                field: field.clone(),
                modulus: modulus.clone(),
                generators: vec![],
                group: AbelianGroup::trivial(),
                table: vec![0],
            });
        }
        let n = n as usize;
        // coordinates w.r.t. the provisional generators
        let mut coords: Vec<Option<Vec<i64>>> = vec![None; n];
        let one = Poly::one().code(field.q()) as usize;
        coords[one] = Some(vec![]);
        let mut members = vec![one];
        let mut gens: Vec<Poly> = Vec::new();
        let mut relations: Vec<Vec<i64>> = Vec::new();
        let unit_count = (0..n as u64)
            .filter(|&c| Poly::from_code(field.q(), c).gcd(modulus, field).deg() == 0)
            .count();
        for code in 0..n {
            if members.len() == unit_count {
                break;
            }
            if coords[code].is_some() {
                continue;
            }
            let g = Poly::from_code(field.q(), code as u64);
            if g.is_zero() || g.gcd(modulus, field).deg() != 0 {
                continue;
            }
            let r = gens.len();
            for c in members.iter() {
                coords[*c].as_mut().unwrap().push(0);
            }
            for rel in relations.iter_mut() {
                rel.push(0);
            }
            // smallest k with g^k in the current subgroup
            let mut k = 1i64;
            let mut gk = g.clone();
            while coords[gk.code(field.q()) as usize].is_none() {
                gk = gk.mul_mod(&g, modulus, field);
                k += 1;
            }
            let mut rel: Vec<i64> = coords[gk.code(field.q()) as usize].as_ref().unwrap().iter().map(|x| -x).collect();
            rel[r] += k;
            relations.push(rel);
            let mut new_members = Vec::with_capacity(members.len() * k as usize);
            let mut gj = Poly::one();
            for j in 1..k {
                gj = gj.mul_mod(&g, modulus, field);
                for &m in &members {
                    let h = Poly::from_code(field.q(), m as u64).mul_mod(&gj, modulus, field);
                    let hc = h.code(field.q()) as usize;
                    let mut c = coords[m].clone().unwrap();
                    c[r] += j;
                    coords[hc] = Some(c);
                    new_members.push(hc);
                }
            }
            members.extend(new_members);
            gens.push(g);
        }
        let r = gens.len();
        let (group, proj, lifts) = from_relations(r, &relations)?;
        let order = group.order();
        let mut table = vec![NON_UNIT; n];
        for &m in &members {
            let c = coords[m].as_ref().unwrap();
            table[m] = group.index(&proj.apply(c)) as u32;
        }
        let generators = lifts
            .iter()
            .map(|l| {
                let mut acc = Poly::one();
                for (g, &e) in gens.iter().zip(l) {
                    let e = e.rem_euclid(order as i64) as u64;
                    acc = acc.mul_mod(&g.pow_mod(e, modulus, field), modulus, field);
                }
                acc
            })
            .collect();
        Ok(UnitGroup { field: field.clone(), modulus: modulus.clone(), generators, group, table })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    /// Coordinates of x mod f with respect to the generators.
    pub fn dlog(&self, x: &Poly) -> Result<GElem> {
        let r = x.rem(&self.modulus, &self.field);
        let code = r.code(self.field.q()) as usize;
        match self.table.get(code) {
            Some(&i) if i != NON_UNIT => Ok(self.group.from_index(i as usize)),
            _ => Err(Error::InvalidInput(format!("{x} is not a unit mod {}", self.modulus))),
        }
    }

    /// Every unit residue, in code order.
    pub fn units(&self) -> impl Iterator<Item = Poly> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &i)| i != NON_UNIT)
            .map(|(c, _)| Poly::from_code(self.field.q(), c as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32, e: u32) -> FieldSpec {
        FieldSpec::new(p, e).unwrap()
    }

    fn parse(s: &str, fld: &FieldSpec) -> Poly {
        Poly::parse(s, 'T', fld).unwrap()
    }

    #[test]
    fn spec_examples() {
        let f2 = f(2, 1);
        assert!(UnitGroup::new(&f2, &parse("T", &f2)).unwrap().group().is_trivial());
        let u = UnitGroup::new(&f2, &parse("T^2", &f2)).unwrap();
        assert_eq!(u.group().divisors(), &[2]);
        assert_eq!(u.generators()[0], parse("T+1", &f2));
        let u = UnitGroup::new(&f2, &parse("T^2+T+1", &f2)).unwrap();
        assert_eq!(u.group().divisors(), &[3]);
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        for (fld, m) in [(f(2, 1), "T^4+T"), (f(3, 1), "T^3"), (f(2, 2), "T^2+T"), (f(5, 1), "T^2+1")] {
            let modulus = parse(m, &fld);
            let u = UnitGroup::new(&fld, &modulus).unwrap();
            let units: Vec<Poly> = u.units().collect();
            let euler: usize = units.len();
            assert_eq!(u.group().order() as usize, euler);
            for a in units.iter().step_by(3) {
                for b in units.iter().step_by(5) {
                    let ab = a.mul_mod(b, &modulus, &fld);
                    let g = u.group();
                    assert_eq!(u.dlog(&ab).unwrap(), g.add(&u.dlog(a).unwrap(), &u.dlog(b).unwrap()));
                }
            }
            for (i, gen) in u.generators().iter().enumerate() {
                assert_eq!(u.dlog(gen).unwrap(), u.group().basis(i));
            }
        }
    }

    #[test]
    fn structure_of_t_cubed_over_f2() {
        // (F_2[T]/T^3)^x has order 4 and exponent 4 (1+T has order 4)
        let f2 = f(2, 1);
        let u = UnitGroup::new(&f2, &parse("T^3", &f2)).unwrap();
        assert_eq!(u.group().divisors(), &[4]);
        let u = UnitGroup::new(&f2, &parse("T^4", &f2)).unwrap();
        assert_eq!(u.group().divisors(), &[2, 4]);
    }

    #[test]
    fn rejects_large_or_bad_moduli() {
        let f2 = f(2, 1);
        assert!(matches!(
            UnitGroup::new(&f2, &Poly::from_code(2, 1 << 21)),
            Err(Error::ResourceLimit(_))
        ));
        assert!(UnitGroup::new(&f(3, 1), &parse("2T", &f(3, 1))).is_err());
        assert!(UnitGroup::new(&f2, &Poly::one()).unwrap().group().is_trivial());
    }
}
