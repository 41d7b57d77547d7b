//! Cyclotomic integers Z[x]/(Phi_n(x)).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::intmat::det_bigint;

/// Integer coefficients of the n-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    assert!(n >= 1);
    // x^n - 1 divided by Phi_d for every proper divisor d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = exact_div(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn exact_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = *b.last().unwrap();
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db] / lb;
        q[i] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] -= c * bj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut r = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r
}

/// An element of Z[zeta_n], stored in the power basis 1, x, ..., x^{phi(n)-1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloInt {
    n: u64,
    coeffs: Vec<BigInt>,
}

impl CycloInt {
    pub fn zero(n: u64) -> Self {
        CycloInt { n, coeffs: vec![BigInt::zero(); euler_phi(n) as usize] }
    }

    pub fn from_int(n: u64, c: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = c.into();
        z
    }

    /// zeta_n^k.
    pub fn zeta_pow(n: u64, k: i64) -> Self {
        let e = k.rem_euclid(n as i64) as usize;
        let mut raw = vec![BigInt::zero(); e + 1];
        raw[e] = BigInt::one();
        Self::reduce(n, raw)
    }

    /// Reduces an arbitrary integer polynomial modulo Phi_n.
    pub fn reduce(n: u64, mut raw: Vec<BigInt>) -> Self {
        let phi = cyclotomic_poly(n);
        let d = phi.len() - 1;
        while raw.len() > d {
            let c = raw.pop().unwrap();
            if c.is_zero() {
                continue;
            }
            let top = raw.len();
            // x^top = -(phi_0 + ... + phi_{d-1} x^{d-1}) x^{top-d}
            for (j, &pj) in phi[..d].iter().enumerate() {
                raw[top - d + j] -= &c * pj;
            }
        }
        raw.resize(d, BigInt::zero());
        CycloInt { n, coeffs: raw }
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        CycloInt { n: self.n, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        CycloInt { n: self.n, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        CycloInt { n: self.n, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CycloInt { n: self.n, coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let mut raw = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        Self::reduce(self.n, raw)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::from_int(self.n, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Field norm to Q, as the determinant of multiplication.
    pub fn norm(&self) -> BigInt {
        let d = self.coeffs.len();
        let mut m = Vec::with_capacity(d);
        for i in 0..d {
            let b = self.mul(&Self::reduce(self.n, {
                let mut v = vec![BigInt::zero(); i + 1];
                v[i] = BigInt::one();
                v
            }));
            m.push(b.coeffs);
        }
        det_bigint(&m)
    }

    /// Reduces every coefficient into [0, m).
    pub fn mod_int(&self, m: &BigInt) -> Self {
        use num_integer::Integer;
        CycloInt { n: self.n, coeffs: self.coeffs.iter().map(|c| c.mod_floor(m)).collect() }
    }
}

impl fmt::Display for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = match i {
                0 => mag.to_string(),
                _ if mag.is_one() => if i == 1 { "z".into() } else { format!("z^{i}") },
                1 => format!("{mag}*z"),
                _ => format!("{mag}*z^{i}"),
            };
            terms.push((c.is_negative(), body));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut s = String::new();
        for (k, (neg, body)) in terms.iter().enumerate() {
            match (k, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(body);
        }
        write!(f, "{s}")
    }
}

impl fmt::Debug for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (mod Phi_{})", self.n)
    }
}
