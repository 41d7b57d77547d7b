//! Finite fields F_q with q = p^e.
//!
//! An element is stored as its code in `0..q`: the base-p digits of the code
//! are the coefficients of the element written as a polynomial in a root of
//! the defining modulus. Codes `0..p` are the prime field. Multiplication
//! goes through exp/log tables built once per field.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ORDER: u64 = 1 << 24;

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus over F_p, low degree first, length e + 1.
    modulus: Vec<u32>,
    tables: Arc<Tables>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}
impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    p: u32,
    e: u32,
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr { p: self.p, e: self.e }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FieldRepr::deserialize(d)?;
        FieldSpec::new(r.p, r.e).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomial helpers over F_p, coefficients low degree first.
fn fp_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let inv_lead = fp_inv(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1;
        let c = (r[k] as u64 * inv_lead as u64 % p as u64) as u32;
        let shift = k - dm;
        for (i, &mc) in m.iter().enumerate() {
            let t = (c as u64 * mc as u64) % p as u64;
            r[shift + i] = ((r[shift + i] as u64 + p as u64 - t) % p as u64) as u32;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut v: Vec<u32> = out.into_iter().map(|x| x as u32).collect();
    fp_trim(&mut v);
    v
}

fn fp_inv(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Irreducibility of a monic polynomial over F_p by trial division with all
/// monic polynomials of degree up to half its degree.
fn fp_is_irreducible(f: &[u32], p: u32) -> bool {
    let d = f.len() - 1;
    if d <= 1 {
        return true;
    }
    for k in 1..=d / 2 {
        let count = (p as u64).pow(k as u32);
        for idx in 0..count {
            let mut g = digits(idx, p, k);
            g.push(1);
            if fp_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn digits(mut x: u64, base: u32, len: usize) -> Vec<u32> {
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push((x % base as u64) as u32);
        x /= base as u64;
    }
    v
}

/// First monic irreducible of degree e over F_p in enumeration order
/// (lower coefficients read as a base-p number, most significant first).
fn first_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    for idx in 0..count {
        let mut f = digits(idx, p, e as usize);
        f.push(1);
        if fp_is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldSpec {
    pub fn new(p: u32, e: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidInput(format!("characteristic {p} is not prime")));
        }
        if e == 0 {
            return Err(Error::InvalidInput("extension degree must be >= 1".into()));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::ResourceLimit(format!("field order {p}^{e} too large")))?;
        let modulus = first_irreducible(p, e);
        let q = q as u32;
        let slow_mul = |a: u32, b: u32| -> u32 {
            let pa = digits(a as u64, p, e as usize);
            let pb = digits(b as u64, p, e as usize);
            let r = fp_rem(&fp_mul(&pa, &pb, p), &modulus, p);
            r.iter().rev().fold(0u32, |acc, &c| acc * p + c)
        };
        // smallest primitive element
        let mut exp = Vec::new();
        for g in 1..q {
            let mut seq = Vec::with_capacity(q as usize - 1);
            let mut x = 1u32;
            loop {
                seq.push(x);
                x = slow_mul(x, g);
                if x == 1 {
                    break;
                }
            }
            if seq.len() == q as usize - 1 {
                exp = seq;
                break;
            }
        }
        let mut log = vec![0u32; q as usize];
        for (i, &x) in exp.iter().enumerate() {
            log[x as usize] = i as u32;
        }
        Ok(FieldSpec { p, e, q, modulus, tables: Arc::new(Tables { exp, log }) })
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Defining modulus over F_p, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.e {
            let d = (a % self.p + b % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.e == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.e {
            let d = (self.p - a % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &self.tables;
        let n = self.q - 1;
        let s = t.log[a as usize] + t.log[b as usize];
        t.exp[(if s >= n { s - n } else { s }) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let t = &self.tables;
        let l = t.log[a as usize];
        Some(t.exp[((self.q - 1 - l) % (self.q - 1)) as usize])
    }

    pub fn pow(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let t = &self.tables;
        let l = t.log[a as usize] as u64 * (n % (self.q as u64 - 1)) % (self.q as u64 - 1);
        t.exp[l as usize]
    }

    /// Fixed primitive element (generator of F_q^x).
    pub fn primitive_element(&self) -> u32 {
        if self.q == 2 {
            1
        } else {
            self.tables.exp[1]
        }
    }

    /// Discrete logarithm with respect to `primitive_element`.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.tables.log[a as usize])
    }

    /// Element from its F_p-coordinates (low degree first).
    pub fn from_coords(&self, c: &[u32]) -> u32 {
        c.iter().rev().fold(0u32, |acc, &x| acc * self.p + x % self.p)
    }

    pub fn coords(&self, a: u32) -> Vec<u32> {
        digits(a as u64, self.p, self.e as usize)
    }

    /// Absolute trace to F_p.
    pub fn trace(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.e {
            acc = self.add(acc, x);
            x = self.pow(x, self.p as u64);
        }
        debug_assert!(acc < self.p);
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q
    }
}

/// A field F_{q^n} together with the embedding of F_q into it.
#[derive(Clone, Debug)]
pub struct ExtensionField {
    pub base: FieldSpec,
    pub field: FieldSpec,
    pub degree: u32,
    embedding: Vec<u32>,
}

impl ExtensionField {
    pub fn embed(&self, a: u32) -> u32 {
        self.embedding[a as usize]
    }
}

/// Builds F_{q^n} with its deterministic modulus and the embedding of F_q.
///
/// The generator of F_q (a root of its modulus) is sent to the smallest root
/// of that modulus in the larger field.
pub fn make_extension_field(base: &FieldSpec, n: u32) -> Result<ExtensionField> {
    if n == 0 {
        return Err(Error::InvalidInput("extension degree must be >= 1".into()));
    }
    let field = FieldSpec::new(base.p, base.e * n)?;
    let eval_modulus = |x: u32| {
        base.modulus
            .iter()
            .rev()
            .fold(0u32, |acc, &c| field.add(field.mul(acc, x), c))
    };
    let root = (0..field.q)
        .find(|&x| eval_modulus(x) == 0)
        .ok_or_else(|| Error::Inconsistency("base modulus has no root in extension".into()))?;
    let embedding = (0..base.q)
        .map(|a| {
            base.coords(a)
                .iter()
                .rev()
                .fold(0u32, |acc, &c| field.add(field.mul(acc, root), c))
        })
        .collect();
    Ok(ExtensionField { base: base.clone(), field, degree: n, embedding })
}
