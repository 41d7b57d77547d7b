//! Polynomials in A = F_q[T].

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

use super::field::FieldSpec;

/// Polynomial over F_q, coefficients low degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<u32>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Ord for Poly {
    /// Degree first, then coefficients from the top down.
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}
impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Poly {
    pub fn new(mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }
    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }
    pub fn constant(c: u32) -> Self {
        Poly::new(vec![c])
    }
    /// The variable T.
    pub fn t() -> Self {
        Poly { coeffs: vec![0, 1] }
    }
    /// T - c.
    pub fn linear(field: &FieldSpec, c: u32) -> Self {
        Poly::new(vec![field.neg(c), 1])
    }
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    /// Degree with `-1` for zero.
    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }
    pub fn lead(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }
    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    /// Monic polynomial of degree `d` whose lower coefficients are the
    /// base-q digits of `index`.
    pub fn monic_from_index(q: u32, d: usize, mut index: u64) -> Self {
        let mut c = Vec::with_capacity(d + 1);
        for _ in 0..d {
            c.push((index % q as u64) as u32);
            index /= q as u64;
        }
        c.push(1);
        Poly { coeffs: c }
    }

    /// Code of a polynomial of degree < n as a base-q number.
    pub fn code(&self, q: u32) -> u64 {
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc * q as u64 + c as u64)
    }

    pub fn from_code(q: u32, mut code: u64) -> Self {
        let mut c = Vec::new();
        while code > 0 {
            c.push((code % q as u64) as u32);
            code /= q as u64;
        }
        Poly::new(c)
    }

    pub fn add(&self, other: &Poly, f: &FieldSpec) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Poly, f: &FieldSpec) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self, f: &FieldSpec) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn scale(&self, c: u32, f: &FieldSpec) -> Poly {
        Poly::new(self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, other: &Poly, f: &FieldSpec) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::new(out)
    }

    pub fn div_rem(&self, d: &Poly, f: &FieldSpec) -> Result<(Poly, Poly)> {
        let dd = d
            .degree()
            .ok_or_else(|| Error::InvalidInput("division by zero polynomial".into()))?;
        let inv = f.inv(d.lead()).expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![0u32; r.len() - dd];
        for k in (dd..r.len()).rev() {
            let c = f.mul(r[k], inv);
            if c == 0 {
                continue;
            }
            quot[k - dd] = c;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                let idx = k - dd + i;
                r[idx] = f.sub(r[idx], f.mul(c, dc));
            }
        }
        r.truncate(dd);
        Ok((Poly::new(quot), Poly::new(r)))
    }

    pub fn rem(&self, d: &Poly, f: &FieldSpec) -> Poly {
        self.div_rem(d, f).expect("nonzero divisor").1
    }

    pub fn monic(&self, f: &FieldSpec) -> Poly {
        match f.inv(self.lead()) {
            Some(i) => self.scale(i, f),
            None => Poly::zero(),
        }
    }

    pub fn gcd(&self, other: &Poly, f: &FieldSpec) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Inverse modulo `m`, if it exists.
    pub fn inv_mod(&self, m: &Poly, f: &FieldSpec) -> Option<Poly> {
        let (mut r0, mut r1) = (m.clone(), self.rem(m, f));
        let (mut s0, mut s1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (qq, r) = r0.div_rem(&r1, f).ok()?;
            let s = s0.sub(&qq.mul(&s1, f), f);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != Some(0) {
            return None;
        }
        let c = f.inv(r0.lead())?;
        Some(s0.scale(c, f).rem(m, f))
    }

    pub fn mul_mod(&self, other: &Poly, m: &Poly, f: &FieldSpec) -> Poly {
        self.mul(other, f).rem(m, f)
    }

    pub fn pow_mod(&self, mut e: u64, m: &Poly, f: &FieldSpec) -> Poly {
        let mut base = self.rem(m, f);
        let mut acc = Poly::one().rem(m, f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, m, f);
            }
            base = base.mul_mod(&base, m, f);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, e: u32, f: &FieldSpec) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self, f);
        }
        acc
    }

    pub fn eval(&self, x: u32, f: &FieldSpec) -> u32 {
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Multiplicity of `p` as a factor (`p` non-constant).
    pub fn valuation(&self, p: &Poly, f: &FieldSpec) -> u32 {
        let mut v = 0;
        let mut x = self.clone();
        while !x.is_zero() {
            let (qq, r) = x.div_rem(p, f).expect("nonzero");
            if !r.is_zero() {
                break;
            }
            v += 1;
            x = qq;
        }
        v
    }

    /// Renders the polynomial in the variable `var`; coefficients are field
    /// codes.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let term = if i == 0 {
                c.to_string()
            } else if c == 1 {
                mono
            } else {
                format!("{c}{mono}")
            };
            terms.push(term);
        }
        terms.join("+")
    }

    /// Parses the format produced by `render`, also accepting `c*T^k`.
    pub fn parse(s: &str, var: char, f: &FieldSpec) -> Result<Poly> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut coeffs: Vec<u32> = Vec::new();
        for term in s.split('+') {
            let bad = || Error::Parse(format!("malformed term '{term}' in '{s}'"));
            if term.is_empty() {
                return Err(bad());
            }
            let (coef_str, mono) = match term.find(var) {
                Some(pos) => (&term[..pos], Some(&term[pos + var.len_utf8()..])),
                None => (term, None),
            };
            let coef_str = coef_str.strip_suffix('*').unwrap_or(coef_str);
            let c: u32 = if coef_str.is_empty() {
                if mono.is_none() {
                    return Err(bad());
                }
                1
            } else {
                coef_str.parse().map_err(|_| bad())?
            };
            if c >= f.q() {
                return Err(Error::Parse(format!("coefficient {c} out of range for F_{}", f.q())));
            }
            let exp: usize = match mono {
                None => 0,
                Some("") => 1,
                Some(rest) => {
                    let digits = rest.strip_prefix('^').ok_or_else(bad)?;
                    if digits.is_empty() {
                        return Err(bad());
                    }
                    digits.parse().map_err(|_| bad())?
                }
            };
            if coeffs.len() <= exp {
                coeffs.resize(exp + 1, 0);
            }
            coeffs[exp] = f.add(coeffs[exp], c);
        }
        Ok(Poly::new(coeffs))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("T"))
    }
}

/// Irreducibility test.
///
/// Degree <= 8 uses trial division by every monic of degree up to half the
/// degree; larger degrees use the x^{q^d} - x gcd criterion.
pub fn is_irreducible(g: &Poly, f: &FieldSpec) -> bool {
    let d = match g.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(d) => d,
    };
    if d <= 8 {
        is_irreducible_trial(g, f)
    } else {
        is_irreducible_rabin(g, f)
    }
}

pub(crate) fn is_irreducible_trial(g: &Poly, f: &FieldSpec) -> bool {
    let d = g.degree().unwrap_or(0);
    if d == 0 {
        return false;
    }
    let q = f.q();
    for k in 1..=d / 2 {
        let count = (q as u64).pow(k as u32);
        for idx in 0..count {
            let h = Poly::monic_from_index(q, k, idx);
            if g.rem(&h, f).is_zero() {
                return false;
            }
        }
    }
    true
}

pub(crate) fn is_irreducible_rabin(g: &Poly, f: &FieldSpec) -> bool {
    let d = match g.degree() {
        None | Some(0) => return false,
        Some(d) => d,
    };
    let g = g.monic(f);
    let q = f.q() as u64;
    let x = Poly::t();
    // x^{q^k} mod g by repeated q-th powering
    let frob = |h: &Poly| h.pow_mod(q, &g, f);
    let mut powers = vec![x.rem(&g, f)];
    for _ in 0..d {
        let next = frob(powers.last().unwrap());
        powers.push(next);
    }
    if powers[d] != x.rem(&g, f) {
        return false;
    }
    let mut n = d;
    let mut primes = Vec::new();
    let mut r = 2;
    while r * r <= n {
        if n % r == 0 {
            primes.push(r);
            while n % r == 0 {
                n /= r;
            }
        }
        r += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    primes.into_iter().all(|r| {
        let h = powers[d / r].sub(&x, f);
        h.gcd(&g, f).degree() == Some(0)
    })
}
