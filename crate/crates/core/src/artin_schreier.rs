//! Artin-Schreier covers y^p - y = h(x) with h a polynomial of degree
//! prime to p: point counts, zeta numerators, and the ray class datum.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::ExtensionDatum;
use crate::ffpoly::{make_extension_field, places_of_degree, FieldSpec, Place, Poly};
use crate::group::AbelianGroup;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveAS {
    field: FieldSpec,
    h: Poly,
}

impl CurveAS {
    pub fn new(field: &FieldSpec, h: Poly) -> Result<Self> {
        let m = h.degree().unwrap_or(0);
        if m == 0 {
            return Err(Error::InvalidInput("h must have a pole".into()));
        }
        if m as u32 % field.p() == 0 {
            return Err(Error::InvalidInput(format!(
                "deg h = {m} must be prime to p = {}",
                field.p()
            )));
        }
        Ok(CurveAS { field: field.clone(), h })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn h(&self) -> &Poly {
        &self.h
    }

    /// (p - 1)(m - 1)/2 for a single pole of order m prime to p.
    pub fn genus(&self) -> usize {
        let m = self.h.degree().unwrap();
        (self.field.p() as usize - 1) * (m - 1) / 2
    }
}

/// Projective points over F_{q^n}: the affine solutions plus the single
/// point over the pole.
pub fn count_points_as(curve: &CurveAS, n: u32) -> Result<u64> {
    let ext = make_extension_field(&curve.field, n)?;
    let big = &ext.field;
    let coeffs: Vec<u32> = curve.h.coeffs().iter().map(|&c| ext.embed(c)).collect();
    let zero_trace = (0..big.q())
        .into_par_iter()
        .filter(|&x| {
            let v = coeffs.iter().rev().fold(0, |acc, &c| big.add(big.mul(acc, x), c));
            big.trace(v) == 0
        })
        .count() as u64;
    Ok(1 + curve.field.p() as u64 * zero_trace)
}

/// P_1(u) from N_1..N_{2g} via k a_k = -sum_j s_j a_{k-j},
/// s_j = 1 + q^j - N_j. Asserts P_1(u) = q^g u^{2g} P_1(1/(qu)).
pub fn zeta_from_counts(q: u64, counts: &[u64], genus: usize) -> Result<Vec<BigInt>> {
    if counts.len() < 2 * genus {
        return Err(Error::InvalidInput(format!("need {} point counts", 2 * genus)));
    }
    let qb = BigInt::from(q);
    let s: Vec<BigInt> = (1..=2 * genus)
        .map(|j| BigInt::one() + qb.pow(j as u32) - BigInt::from(counts[j - 1]))
        .collect();
    let mut a = vec![BigInt::one()];
    for k in 1..=2 * genus {
        let mut acc = BigInt::zero();
        for j in 1..=k {
            acc -= &s[j - 1] * &a[k - j];
        }
        let (quo, rem) = acc.div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::Inconsistency(format!("Newton identity not integral at k = {k}")));
        }
        a.push(quo);
    }
    for i in 0..=genus {
        if a[2 * genus - i] != qb.pow((genus - i) as u32) * &a[i] {
            return Err(Error::Inconsistency(format!(
                "functional equation fails at u^{i}: wrong genus or point bookkeeping"
            )));
        }
    }
    Ok(a)
}

/// P_1 of the curve from its own point counts.
pub fn curve_p1(curve: &CurveAS) -> Result<Vec<BigInt>> {
    let g = curve.genus();
    let counts = (1..=2 * g as u32).map(|n| count_points_as(curve, n)).collect::<Result<Vec<_>>>()?;
    zeta_from_counts(curve.field.q() as u64, &counts, g)
}

/// Frobenius of the place P (in the coordinate T = 1/x) in Z/p:
/// Tr(h(1/T) mod P) down to F_p.
fn as_symbol(curve: &CurveAS, p: &Poly) -> u32 {
    let f = &curve.field;
    let tinv = Poly::t().inv_mod(p, f).expect("P is not T");
    let mut v = Poly::zero();
    for &c in curve.h.coeffs().iter().rev() {
        v = v.mul_mod(&tinv, p, f).add(&Poly::constant(c), f).rem(p, f);
    }
    // Tr_{F_q[T]/P -> F_q}: sum of q-power Frobenius images
    let d = p.degree().unwrap();
    let mut tr = Poly::zero();
    let mut w = v;
    for _ in 0..d {
        tr = tr.add(&w, f);
        w = w.pow_mod(f.q() as u64, p, f);
    }
    f.trace(tr.coeff(0))
}

/// Solves A x = b over F_p; None when the system is inconsistent.
/// Returns the solution with free variables set to zero and the rank.
fn solve_mod_p(rows: &[Vec<i64>], rhs: &[i64], cols: usize, p: i64) -> Option<(Vec<i64>, usize)> {
    let mut m: Vec<Vec<i64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut v: Vec<i64> = r.iter().map(|x| x.rem_euclid(p)).collect();
            v.push(b.rem_euclid(p));
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..m.len()).find(|&i| m[i][col] != 0) else { continue };
        m.swap(row, pr);
        let inv = (0..p).find(|&k| k * m[row][col] % p == 1).unwrap();
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != 0 {
                let k = m[i][col];
                let pivot_row = m[row].clone();
                for (x, y) in m[i].iter_mut().zip(pivot_row) {
                    *x = (*x - k * y).rem_euclid(p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| r[cols] != 0) {
        return None;
    }
    let mut x = vec![0; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some((x, pivots.len()))
}

/// The Z/p ray class datum of the cover, in the coordinate T = 1/x so the
/// pole sits at the place T with conductor T^{m+1}.
pub fn artin_schreier_datum(curve: &CurveAS) -> Result<ExtensionDatum> {
    let f = &curve.field;
    let p = f.p() as i64;
    let m = curve.h.degree().unwrap();
    let modulus = Poly::t().pow(m as u32 + 1, f);
    let g = AbelianGroup::cyclic(p as u64);
    let probe = ExtensionDatum::carlitz(f, &modulus)?;
    let units = probe.unit_group();
    let divs = units.group().divisors().to_vec();
    // only generators of order divisible by p can map nontrivially
    let free: Vec<usize> = (0..divs.len()).filter(|&i| divs[i] as i64 % p == 0).collect();
    let d = f.trace(curve.h.coeff(0)) as i64;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut places = Vec::new();
    let mut solution = None;
    for deg in 1..=12u32 {
        for v in places_of_degree(f, deg) {
            let pp = v.poly().unwrap().clone();
            if pp == Poly::t() {
                continue;
            }
            let c = units.dlog(&pp)?;
            rows.push(free.iter().map(|&i| c[i]).collect::<Vec<i64>>());
            rhs.push(as_symbol(curve, &pp) as i64 - deg as i64 * d);
            places.push(v);
        }
        let (x, rank) = solve_mod_p(&rows, &rhs, free.len(), p)
            .ok_or_else(|| Error::Inconsistency("Artin-Schreier symbols are not a ray class character".into()))?;
        if rank == free.len() {
            solution = Some(x);
            // one more degree as a consistency check
            if deg >= 2 {
                break;
            }
        }
    }
    let x = solution.ok_or_else(|| Error::Inconsistency("could not determine the reciprocity map".into()))?;
    let mut images = vec![vec![0i64]; divs.len()];
    for (k, &i) in free.iter().enumerate() {
        images[i] = vec![x[k]];
    }
    let datum = ExtensionDatum::new(f, modulus, false, g, images, vec![d.rem_euclid(p)])?;
    for v in &places {
        let expect = as_symbol(curve, v.poly().unwrap()) as i64;
        if datum.frobenius(v)? != vec![expect] {
            return Err(Error::Inconsistency(format!("fitted reciprocity disagrees at {v}")));
        }
    }
    if datum.frobenius(&Place::Infinity)? != vec![d.rem_euclid(p)] {
        return Err(Error::Inconsistency("fitted reciprocity disagrees at infinity".into()));
    }
    Ok(datum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(p: u32, h: &str) -> CurveAS {
        let f = FieldSpec::prime(p).unwrap();
        CurveAS::new(&f, Poly::parse(h, 'T', &f).unwrap()).unwrap()
    }

    #[test]
    fn point_counts() {
        let c = curve(2, "T^3");
        assert_eq!(c.genus(), 1);
        assert_eq!(count_points_as(&c, 1).unwrap(), 3);
        assert_eq!(count_points_as(&c, 2).unwrap(), 9);
        let p1 = curve_p1(&c).unwrap();
        assert_eq!(p1, [1, 0, 2].map(BigInt::from));
        let lin = curve(3, "T");
        assert_eq!(curve_p1(&lin).unwrap(), vec![BigInt::one()]);
    }

    #[test]
    fn bad_curves() {
        let f = FieldSpec::prime(2).unwrap();
        assert!(CurveAS::new(&f, Poly::parse("T^2", 'T', &f).unwrap()).is_err());
        assert!(CurveAS::new(&f, Poly::one()).is_err());
        // wrong genus trips the functional equation
        assert!(zeta_from_counts(2, &[3, 9, 9, 17], 2).is_err());
    }

    #[test]
    fn fitted_datum_matches_symbols() {
        for (p, h) in [(2, "T^3"), (2, "T^5"), (2, "T^3+T"), (3, "T^2"), (3, "T^4+T")] {
            let c = curve(p, h);
            let d = artin_schreier_datum(&c).unwrap();
            assert_eq!(d.group().order(), p as u64);
            assert_eq!(d.ramified_places(), vec![Place::Finite(Poly::t())]);
            for v in places_of_degree(c.field(), 5) {
                assert_eq!(d.frobenius(&v).unwrap(), vec![as_symbol(&c, v.poly().unwrap()) as i64]);
            }
        }
    }
}
