//! Places of k = F_q(T).

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::field::FieldSpec;
use super::poly::{is_irreducible, Poly};

/// A closed point of P^1 over F_q.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Place {
    Infinity,
    /// Monic irreducible polynomial.
    Finite(Poly),
}

impl Place {
    /// Checked constructor for a finite place.
    pub fn finite(p: Poly, f: &FieldSpec) -> Result<Place> {
        if !p.is_monic() || !is_irreducible(&p, f) {
            return Err(Error::InvalidInput(format!("{p} is not monic irreducible")));
        }
        Ok(Place::Finite(p))
    }

    pub fn degree(&self) -> u32 {
        match self {
            Place::Infinity => 1,
            Place::Finite(p) => p.degree().unwrap_or(0) as u32,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    pub fn poly(&self) -> Option<&Poly> {
        match self {
            Place::Infinity => None,
            Place::Finite(p) => Some(p),
        }
    }

    /// q_v = q^{deg v}.
    pub fn residue_order(&self, f: &FieldSpec) -> u64 {
        (f.q() as u64).pow(self.degree())
    }

    pub fn parse(s: &str, f: &FieldSpec) -> Result<Place> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Place::Infinity);
        }
        let p = Poly::parse(s, 'T', f)?;
        Place::finite(p, f).map_err(|e| Error::Parse(format!("'{s}': {e}")))
    }
}

impl Ord for Place {
    /// Degree first with Infinity leading its degree, then coefficients.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Place::Infinity, Place::Infinity) => Ordering::Equal,
            (Place::Infinity, Place::Finite(p)) => {
                1.cmp(&(p.degree().unwrap_or(0))).then(Ordering::Less)
            }
            (Place::Finite(p), Place::Infinity) => {
                (p.degree().unwrap_or(0)).cmp(&1).then(Ordering::Greater)
            }
            (Place::Finite(a), Place::Finite(b)) => a.cmp(b),
        }
    }
}
impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Finite places of exactly degree `d`, in enumeration order.
pub fn places_of_degree(field: &FieldSpec, d: u32) -> Vec<Place> {
    let q = field.q() as u64;
    let count = q.pow(d);
    (0..count)
        .into_par_iter()
        .filter_map(|idx| {
            let p = Poly::monic_from_index(field.q(), d as usize, idx);
            is_irreducible(&p, field).then_some(Place::Finite(p))
        })
        .collect()
}

/// All places of degree <= `max_degree`: Infinity first (if requested),
/// then by degree, then lexicographically on coefficients from the top.
pub fn enumerate_places(field: &FieldSpec, max_degree: u32, include_infinity: bool) -> Result<Vec<Place>> {
    if max_degree == 0 {
        return Err(Error::InvalidInput("max_degree must be >= 1".into()));
    }
    (field.q() as u64)
        .checked_pow(max_degree)
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::ResourceLimit(format!("q^{max_degree} monic polynomials")))?;
    let mut out = Vec::new();
    if include_infinity {
        out.push(Place::Infinity);
    }
    for d in 1..=max_degree {
        out.extend(places_of_degree(field, d));
    }
    Ok(out)
}

/// Necklace count of monic irreducibles of degree n over F_q.
pub fn necklace_count(q: u64, n: u32) -> u64 {
    let mut total: i128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            total += mobius(d) as i128 * (q as i128).pow(n / d);
        }
    }
    (total / n as i128) as u64
}

fn mobius(mut n: u32) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// A nonzero rational function num/den in k = F_q(T).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if num.is_zero() || den.is_zero() {
            return Err(Error::InvalidInput("zero function".into()));
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(p: Poly) -> Result<Self> {
        Self::new(p, Poly::one())
    }

    /// Leading coefficient in the expansion at infinity (in 1/T).
    pub fn sign(&self, f: &FieldSpec) -> u32 {
        f.mul(self.num.lead(), f.inv(self.den.lead()).expect("nonzero"))
    }

    pub fn mul(&self, other: &Self, f: &FieldSpec) -> Self {
        RationalFunction { num: self.num.mul(&other.num, f), den: self.den.mul(&other.den, f) }
    }

    pub fn inverse(&self) -> Self {
        RationalFunction { num: self.den.clone(), den: self.num.clone() }
    }
}

/// ord_v(f). At infinity this is deg(den) - deg(num).
pub fn ord_at(place: &Place, f: &RationalFunction, field: &FieldSpec) -> Result<i64> {
    if f.num.is_zero() || f.den.is_zero() {
        return Err(Error::InvalidInput("ord of the zero function".into()));
    }
    Ok(match place {
        Place::Infinity => f.den.deg() - f.num.deg(),
        Place::Finite(p) => f.num.valuation(p, field) as i64 - f.den.valuation(p, field) as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32, e: u32) -> FieldSpec {
        FieldSpec::new(p, e).unwrap()
    }

    fn names(v: &[Place]) -> Vec<String> {
        v.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn six_places_over_f2() {
        let pl = enumerate_places(&f(2, 1), 3, true).unwrap();
        assert_eq!(
            names(&pl),
            ["inf", "T", "T+1", "T^2+T+1", "T^3+T+1", "T^3+T^2+1"]
        );
    }

    #[test]
    fn degree_one_without_infinity() {
        let pl = enumerate_places(&f(2, 1), 1, false).unwrap();
        assert_eq!(names(&pl), ["T", "T+1"]);
    }

    #[test]
    fn f3_degree_two() {
        let pl = enumerate_places(&f(3, 1), 2, false).unwrap();
        assert_eq!(pl.iter().filter(|p| p.degree() == 1).count(), 3);
        assert_eq!(pl.iter().filter(|p| p.degree() == 2).count(), 3);
    }

    #[test]
    fn counts_match_necklace_formula() {
        for (p, e) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let fld = f(p, e);
            for d in 1..=6 {
                assert_eq!(
                    places_of_degree(&fld, d).len() as u64,
                    necklace_count(fld.q() as u64, d),
                    "q={} d={d}",
                    fld.q()
                );
            }
        }
    }

    #[test]
    fn enumeration_is_sorted_and_stable() {
        let fld = f(3, 1);
        let a = enumerate_places(&fld, 4, true).unwrap();
        let b = enumerate_places(&fld, 4, true).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ord_examples() {
        let f2 = f(2, 1);
        let t2 = RationalFunction::from_poly(Poly::new(vec![0, 0, 1])).unwrap();
        assert_eq!(ord_at(&Place::Finite(Poly::t()), &t2, &f2).unwrap(), 2);
        assert_eq!(ord_at(&Place::Infinity, &t2, &f2).unwrap(), -2);
        let t3p1 = RationalFunction::from_poly(Poly::new(vec![1, 0, 0, 1])).unwrap();
        let v = Place::Finite(Poly::new(vec![1, 1, 1]));
        assert_eq!(ord_at(&v, &t3p1, &f2).unwrap(), 1);
        assert!(RationalFunction::new(Poly::zero(), Poly::one()).is_err());
    }

    #[test]
    fn place_strings_round_trip() {
        let fld = f(3, 1);
        for p in enumerate_places(&fld, 3, true).unwrap() {
            assert_eq!(Place::parse(&p.to_string(), &fld).unwrap(), p);
        }
        assert!(Place::parse("T^2+1", &f(2, 1)).is_err()); // (T+1)^2
        assert!(Place::parse("T^", &f(2, 1)).is_err());
    }
}
