//! Lambda = Z_p[[t]] at finite precision, Weierstrass preparation,
//! cyclotomic valuations, tower assembly and mu/lambda invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cyclo::{euler_phi, CycloInt};
use crate::error::{Error, Result};
use crate::intmat::p_valuation;

mod tower;
pub use tower::*;

/// Default p-adic precision exponent N.
pub const DEFAULT_P_PRECISION: u32 = 24;
/// Default t-adic precision D.
pub const DEFAULT_T_PRECISION: usize = 64;

/// sum c_i t^i with c_i in Z/p^N, truncated after t^D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaElement {
    p: u64,
    n: u32,
    coeffs: Vec<BigInt>,
}

impl LambdaElement {
    pub fn new(p: u64, n: u32, d: usize, coeffs: &[BigInt]) -> Self {
        let m = BigInt::from(p).pow(n);
        let mut c: Vec<BigInt> = coeffs.iter().take(d + 1).map(|x| x.mod_floor(&m)).collect();
        c.resize(d + 1, BigInt::zero());
        LambdaElement { p, n, coeffs: c }
    }

    pub fn from_i64(p: u64, n: u32, d: usize, coeffs: &[i64]) -> Self {
        Self::new(p, n, d, &coeffs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn p_precision(&self) -> u32 {
        self.n
    }

    pub fn t_precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.n)
    }

    fn like(&self, coeffs: Vec<BigInt>) -> Self {
        Self::new(self.p, self.n, self.t_precision(), &coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        !(&self.coeffs[0] % BigInt::from(self.p)).is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        self.like(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.like(self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        self.like(self.coeffs.iter().map(|a| a * k).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.t_precision();
        let mut out = vec![BigInt::zero(); d + 1];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in o.coeffs.iter().enumerate().take(d + 1 - i) {
                out[i + j] += a * b;
            }
        }
        self.like(out)
    }

    /// Inverse of a unit by Newton iteration x <- x(2 - a x).
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::InvalidInput("not a unit of Lambda".into()));
        }
        let m = self.modulus();
        let c0 = self.coeffs[0].modinv(&m).expect("unit constant term");
        let mut x = self.like(vec![c0]);
        let two = self.like(vec![BigInt::from(2)]);
        // precision doubles in both t and p per step
        let steps = 2 + (self.t_precision() + self.n as usize).next_power_of_two().trailing_zeros();
        for _ in 0..steps {
            x = x.mul(&two.sub(&self.mul(&x)));
        }
        Ok(x)
    }

    /// Evaluation of a polynomial in (1 + t).
    pub fn from_group_ring(p: u64, n: u32, d: usize, cyclic: &[BigInt]) -> Self {
        let mut acc = vec![BigInt::zero(); cyclic.len().max(1)];
        // Horner in x = 1 + t
        for c in cyclic.iter().rev() {
            let mut next = vec![BigInt::zero(); acc.len()];
            for i in 0..acc.len() {
                next[i] += &acc[i];
                if i + 1 < acc.len() {
                    next[i + 1] += &acc[i];
                }
            }
            next[0] += c;
            acc = next;
        }
        Self::new(p, n, d, &acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weierstrass {
    pub mu: u32,
    pub lambda: usize,
    /// Monic of degree lambda, lower coefficients divisible by p.
    pub distinguished: Vec<BigInt>,
    pub unit: LambdaElement,
}

/// eta = unit * p^mu * g with g distinguished.
pub fn weierstrass_prepare(eta: &LambdaElement) -> Result<Weierstrass> {
    let p = BigInt::from(eta.p);
    let n = eta.n;
    let mu = eta
        .coeffs
        .iter()
        .filter_map(|c| p_valuation(c, &p))
        .min()
        .ok_or(Error::Precision { kind: "p" })?;
    if mu + 1 >= n {
        return Err(Error::Precision { kind: "p" });
    }
    let pm = p.pow(mu);
    let prec = n - mu;
    let d = eta.t_precision();
    let reduced: Vec<BigInt> = eta.coeffs.iter().map(|c| c / &pm).collect();
    let lambda = reduced.iter().position(|c| !(c % &p).is_zero()).unwrap();
    if lambda >= d {
        return Err(Error::Precision { kind: "t" });
    }
    let e = LambdaElement::new(eta.p, prec, d, &reduced);
    // e = b + t^lambda c with b = 0 mod p and c a unit
    let b = e.like(e.coeffs[..lambda].to_vec());
    let c = e.like(e.coeffs[lambda..].to_vec());
    let c_inv = c.inverse()?;
    let tau = |f: &LambdaElement| f.like(f.coeffs[lambda..].to_vec());
    let one = e.like(vec![BigInt::one()]);
    let mut q = c_inv.clone();
    for _ in 0..prec + 1 {
        q = c_inv.mul(&one.sub(&tau(&q.mul(&b))));
    }
    let g = q.mul(&e);
    let mut distinguished = g.coeffs[..lambda].to_vec();
    distinguished.push(BigInt::one());
    let unit = q.inverse()?;
    Ok(Weierstrass { mu, lambda, distinguished, unit })
}

/// ord_p(x) for x in Z[zeta_{p^k}], normalised by ord_p(p) = 1.
pub fn valuation_cyclotomic(x: &CycloInt, p: u64) -> Result<BigRational> {
    if x.is_zero() {
        return Err(Error::InvalidInput("valuation of zero".into()));
    }
    let n = x.order();
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    if m != 1 || n == 1 {
        if n == 1 {
            let v = p_valuation(&x.coeffs()[0], &BigInt::from(p)).unwrap();
            return Ok(BigRational::from_integer(v.into()));
        }
        return Err(Error::InvalidInput(format!("order {n} is not a power of {p}")));
    }
    let e = euler_phi(n) as usize;
    // substitute zeta = 1 + pi and reduce modulo Phi_n(1 + pi), which is
    // Eisenstein, so v_pi(sum a_i pi^i) = min(e v_p(a_i) + i)
    let mut poly = vec![BigInt::zero(); x.coeffs().len()];
    for (k, a) in x.coeffs().iter().enumerate() {
        // a (1 + pi)^k
        let mut binom = BigInt::one();
        for i in 0..=k {
            poly[i] += a * &binom;
            binom = binom * BigInt::from(k - i) / BigInt::from(i + 1);
        }
    }
    let phi: Vec<BigInt> = crate::cyclo::cyclotomic_poly(n).into_iter().map(BigInt::from).collect();
    let mut shifted = vec![BigInt::zero(); phi.len()];
    for (k, a) in phi.iter().enumerate() {
        let mut binom = BigInt::one();
        for i in 0..=k {
            shifted[i] += a * &binom;
            binom = binom * BigInt::from(k - i) / BigInt::from(i + 1);
        }
    }
    // monic reduction
    for i in (e..poly.len()).rev() {
        let c = poly[i].clone();
        if c.is_zero() {
            continue;
        }
        for j in 0..=e {
            poly[i - e + j] -= &c * &shifted[j];
        }
    }
    let pb = BigInt::from(p);
    let k = poly[..e.min(poly.len())]
        .iter()
        .enumerate()
        .filter_map(|(i, a)| p_valuation(a, &pb).map(|v| e as u64 * v as u64 + i as u64))
        .min()
        .ok_or_else(|| Error::InvalidInput("valuation of zero".into()))?;
    Ok(BigRational::new(k.into(), (e as u64).into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthFit {
    pub mu: i64,
    pub lambda: i64,
    pub nu: i64,
    pub tail_start: usize,
}

/// Longest tail on which e_n = mu p^n + lambda n + nu exactly, with at least
/// three points.
pub fn growth_fit(e: &[i64], p: u64) -> Result<GrowthFit> {
    let p = p as i128;
    for start in 0..e.len().saturating_sub(2) {
        let pn = p.pow(start as u32);
        let d0 = (e[start + 1] - e[start]) as i128;
        let d1 = (e[start + 2] - e[start + 1]) as i128;
        let den = pn * (p - 1) * (p - 1);
        if (d1 - d0) % den != 0 {
            continue;
        }
        let mu = (d1 - d0) / den;
        let lambda = d0 - mu * pn * (p - 1);
        let nu = e[start] as i128 - mu * pn - lambda * start as i128;
        if mu < 0 || lambda < 0 {
            continue;
        }
        let fits = (start..e.len()).all(|n| mu * p.pow(n as u32) + lambda * n as i128 + nu == e[n] as i128);
        if fits {
            return Ok(GrowthFit { mu: mu as i64, lambda: lambda as i64, nu: nu as i64, tail_start: start });
        }
    }
    Err(Error::Inconclusive("no tail of at least three points fits mu p^n + lambda n + nu".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationFit {
    pub mu: u64,
    pub lambda_plus: u64,
    /// Layers whose decompositions agreed.
    pub layers: (u32, u32),
}

/// Splits ord = mu + l / (p^n - p^{n-1}) with 0 <= l < p^n - p^{n-1}.
pub fn split_valuation(ord: &BigRational, p: u64, n: u32) -> Option<(u64, u64)> {
    let phi = BigInt::from(p.pow(n) - p.pow(n - 1));
    let mu = ord.floor().to_integer();
    let l = (ord - BigRational::from_integer(mu.clone())) * BigRational::from_integer(phi);
    if !l.is_integer() || mu.is_negative() {
        return None;
    }
    Some((mu.to_u64()?, l.to_integer().to_u64()?))
}

/// (mu, lambda + deg delta) from valuations of theta at characters of exact
/// order p^n, using the highest two consecutive layers that agree.
pub fn mu_lambda_from_valuations(vals: &[(u32, BigRational)], p: u64) -> Result<ValuationFit> {
    let splits: Vec<(u32, Option<(u64, u64)>)> = vals.iter().map(|(n, v)| (*n, split_valuation(v, p, *n))).collect();
    for w in splits.windows(2).rev() {
        if w[1].0 != w[0].0 + 1 {
            continue;
        }
        if let (Some(a), Some(b)) = (w[0].1, w[1].1) {
            if a == b {
                return Ok(ValuationFit { mu: a.0, lambda_plus: a.1, layers: (w[0].0, w[1].0) });
            }
        }
    }
    Err(Error::Inconclusive("no two consecutive layers give the same (mu, l)".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam(p: u64, c: &[i64]) -> LambdaElement {
        LambdaElement::from_i64(p, 12, 16, c)
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn weierstrass_examples() {
        let w = weierstrass_prepare(&lam(3, &[3, 1])).unwrap();
        assert_eq!((w.mu, w.lambda), (0, 1));
        assert_eq!(w.distinguished, big(&[3, 1]));
        assert_eq!(w.unit.coeffs()[0], BigInt::one());
        assert!(w.unit.coeffs()[1..].iter().all(|c| c.is_zero()));
        let w = weierstrass_prepare(&lam(3, &[3, 3])).unwrap();
        assert_eq!((w.mu, w.lambda), (1, 0));
        assert_eq!(w.distinguished, big(&[1]));
        assert_eq!(&w.unit.coeffs()[..3], &big(&[1, 1, 0])[..]);
        let w = weierstrass_prepare(&lam(5, &[5, 5, 1])).unwrap();
        assert_eq!(w.lambda, 2);
        assert_eq!(w.distinguished, big(&[5, 5, 1]));
        assert!(weierstrass_prepare(&lam(3, &[0])).is_err());
        assert!(weierstrass_prepare(&LambdaElement::from_i64(2, 8, 3, &[2, 2, 2, 2])).is_ok());
        assert!(weierstrass_prepare(&LambdaElement::from_i64(2, 8, 3, &[2, 2, 2, 1])).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn weierstrass_round_trip(p in prop::sample::select(vec![2u64, 3, 5]), c in prop::collection::vec(-50i64..50, 1..10), shift in 0u32..3) {
            let n = 16;
            let d = 24;
            let pk = (p as i64).pow(shift);
            let coeffs: Vec<i64> = c.iter().map(|x| x * pk).collect();
            let eta = LambdaElement::from_i64(p, n, d, &coeffs);
            prop_assume!(!eta.is_zero());
            let Ok(w) = weierstrass_prepare(&eta) else { return Ok(()); };
            let pb = BigInt::from(p);
            for c in &w.distinguished[..w.lambda] {
                prop_assert!((c % &pb).is_zero());
            }
            prop_assert!(w.unit.is_unit());
            let prec = n - w.mu;
            let g = LambdaElement::new(p, prec, d, &w.distinguished);
            let u = LambdaElement::new(p, prec, d, w.unit.coeffs());
            let prod = u.mul(&g);
            let pm = pb.pow(w.mu);
            let m = pb.pow(prec);
            for i in 0..=(d - w.lambda) {
                let want = (&eta.coeffs()[i] / &pm).mod_floor(&m);
                prop_assert_eq!(&prod.coeffs()[i], &want);
            }
        }

        #[test]
        fn inverse_is_inverse(p in prop::sample::select(vec![2u64, 3]), c in prop::collection::vec(-20i64..20, 1..8)) {
            let a = LambdaElement::from_i64(p, 10, 12, &c);
            prop_assume!(a.is_unit());
            let prod = a.mul(&a.inverse().unwrap());
            prop_assert_eq!(prod.coeffs()[0].clone(), BigInt::one());
            prop_assert!(prod.coeffs()[1..].iter().all(|x| x.is_zero()));
        }

        /// ord_p(x) = ord_p(N(x)) / [Q(zeta) : Q].
        #[test]
        fn valuation_matches_norm(p in prop::sample::select(vec![2u64, 3, 5]), k in 1u32..3, c in prop::collection::vec(-30i64..30, 1..12)) {
            let n = p.pow(k);
            let x = CycloInt::reduce(n, big(&c));
            prop_assume!(!x.is_zero());
            let v = valuation_cyclotomic(&x, p).unwrap();
            let norm = x.norm();
            let vn = p_valuation(&norm, &BigInt::from(p)).unwrap();
            prop_assert_eq!(v, BigRational::new(vn.into(), euler_phi(n).into()));
        }
    }

    #[test]
    fn valuation_examples() {
        for p in [2u64, 3, 5] {
            assert_eq!(valuation_cyclotomic(&CycloInt::from_int(p, p), p).unwrap(), BigRational::from_integer(1.into()));
            let pi = CycloInt::zeta_pow(p, 1).sub(&CycloInt::from_int(p, 1));
            assert_eq!(valuation_cyclotomic(&pi, p).unwrap(), BigRational::new(1.into(), (p - 1).into()));
        }
        let x = CycloInt::zeta_pow(3, 1).add(&CycloInt::from_int(3, 1));
        assert_eq!(valuation_cyclotomic(&x, 3).unwrap(), BigRational::zero());
        let y = CycloInt::zeta_pow(2, 1).add(&CycloInt::from_int(2, 1));
        assert!(valuation_cyclotomic(&y, 2).is_err());
        assert_eq!(valuation_cyclotomic(&CycloInt::from_int(1, 12), 2).unwrap(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn growth_examples() {
        assert_eq!(growth_fit(&[0, 0, 0, 0], 2).unwrap(), GrowthFit { mu: 0, lambda: 0, nu: 0, tail_start: 0 });
        assert_eq!(growth_fit(&[1, 2, 4, 8], 2).unwrap(), GrowthFit { mu: 1, lambda: 0, nu: 0, tail_start: 0 });
        assert_eq!(growth_fit(&[5, 1, 3, 5, 7], 3).unwrap(), GrowthFit { mu: 0, lambda: 2, nu: -1, tail_start: 1 });
        assert!(growth_fit(&[0, 1], 2).is_err());
        assert!(growth_fit(&[0, 5, 1, 0], 2).is_err());
    }

    #[test]
    fn valuation_splits() {
        let one = BigRational::from_integer(1.into());
        let f = mu_lambda_from_valuations(&[(1, one.clone()), (2, one)], 2).unwrap();
        assert_eq!((f.mu, f.lambda_plus), (1, 0));
        let f = mu_lambda_from_valuations(
            &[(2, BigRational::new(1.into(), 2.into())), (3, BigRational::new(1.into(), 4.into()))],
            2,
        )
        .unwrap();
        assert_eq!((f.mu, f.lambda_plus), (0, 1));
        // lambda = 2 only decomposes correctly once p^n - p^{n-1} > 2
        let vals = [1u32, 2, 3, 4].map(|n| (n, BigRational::new(2.into(), BigInt::from(2u64.pow(n - 1)))));
        let f = mu_lambda_from_valuations(&vals, 2).unwrap();
        assert_eq!((f.mu, f.lambda_plus, f.layers), (0, 2, (3, 4)));
        assert!(mu_lambda_from_valuations(&[(1, BigRational::from_integer(1.into())), (2, BigRational::zero())], 2).is_err());
    }

    #[test]
    fn group_ring_conversion() {
        // sigma -> 1 + t, sigma^2 -> 1 + 2t + t^2
        let x = LambdaElement::from_group_ring(3, 6, 8, &big(&[0, 0, 1]));
        assert_eq!(&x.coeffs()[..3], &big(&[1, 2, 1])[..]);
    }
}
