//! Group rings R[G] for finite abelian G, R = Z or Z/p^N, and truncated
//! power series over them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::character::Character;
use crate::cyclo::CycloInt;
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GElem, Projection};
use crate::intmat::ModEchelon;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientRing {
    Integers,
    ModPPower { p: u64, n: u32 },
}

impl CoefficientRing {
    pub fn modulus(&self) -> Option<BigInt> {
        match *self {
            CoefficientRing::Integers => None,
            CoefficientRing::ModPPower { p, n } => Some(BigInt::from(p).pow(n)),
        }
    }

    fn canon(&self, c: BigInt) -> BigInt {
        match self.modulus() {
            None => c,
            Some(m) => c.mod_floor(&m),
        }
    }
}

/// Sparse element of R[G]; keys are element indices of the group.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupRingElement {
    ring: CoefficientRing,
    group: AbelianGroup,
    coeffs: BTreeMap<usize, BigInt>,
}

impl GroupRingElement {
    pub fn zero(group: &AbelianGroup, ring: CoefficientRing) -> Self {
        GroupRingElement { ring, group: group.clone(), coeffs: BTreeMap::new() }
    }

    pub fn one(group: &AbelianGroup, ring: CoefficientRing) -> Self {
        Self::monomial(group, ring, &group.zero(), BigInt::one())
    }

    pub fn monomial(group: &AbelianGroup, ring: CoefficientRing, g: &GElem, c: BigInt) -> Self {
        let mut x = Self::zero(group, ring);
        x.add_term(group.index(g), c);
        x
    }

    pub fn from_terms(group: &AbelianGroup, ring: CoefficientRing, terms: &[(GElem, BigInt)]) -> Self {
        let mut x = Self::zero(group, ring);
        for (g, c) in terms {
            x.add_term(group.index(g), c.clone());
        }
        x
    }

    /// Sum of all group elements.
    pub fn norm_element(group: &AbelianGroup, ring: CoefficientRing) -> Self {
        let mut x = Self::zero(group, ring);
        for i in 0..group.order() as usize {
            x.add_term(i, BigInt::one());
        }
        x
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn add_term(&mut self, idx: usize, c: BigInt) {
        let e = self.coeffs.entry(idx).or_insert_with(BigInt::zero);
        *e += c;
        let v = self.ring.canon(std::mem::take(e));
        if v.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, v);
        }
    }

    pub fn coeff(&self, g: &GElem) -> BigInt {
        self.coeffs.get(&self.group.index(g)).cloned().unwrap_or_default()
    }

    /// (group element, coefficient) pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (GElem, &BigInt)> + '_ {
        self.coeffs.iter().map(|(&i, c)| (self.group.from_index(i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.group, o.group, "group mismatch");
        assert_eq!(self.ring, o.ring, "coefficient ring mismatch");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut x = self.clone();
        for (&i, c) in &o.coeffs {
            x.add_term(i, c.clone());
        }
        x
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        let mut x = Self::zero(&self.group, self.ring);
        for (&i, c) in &self.coeffs {
            x.add_term(i, -c);
        }
        x
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut x = Self::zero(&self.group, self.ring);
        for (&i, c) in &self.coeffs {
            x.add_term(i, c * k);
        }
        x
    }

    /// Multiplication by a group element.
    pub fn shift(&self, g: &GElem) -> Self {
        let mut x = Self::zero(&self.group, self.ring);
        for (&i, c) in &self.coeffs {
            let h = self.group.add(&self.group.from_index(i), g);
            x.coeffs.insert(self.group.index(&h), c.clone());
        }
        x
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let g = &self.group;
        let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (&i, a) in &self.coeffs {
            let gi = g.from_index(i);
            for (&j, b) in &o.coeffs {
                let k = g.index(&g.add(&gi, &g.from_index(j)));
                *acc.entry(k).or_insert_with(BigInt::zero) += a * b;
            }
        }
        let mut x = Self::zero(g, self.ring);
        for (k, c) in acc {
            x.add_term(k, c);
        }
        x
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> BigInt {
        self.ring.canon(self.coeffs.values().sum())
    }

    pub fn to_ring(&self, ring: CoefficientRing) -> Self {
        let mut x = Self::zero(&self.group, ring);
        for (&i, c) in &self.coeffs {
            x.add_term(i, c.clone());
        }
        x
    }

    pub fn evaluate_character(&self, chi: &Character) -> Result<CycloInt> {
        if chi.exponents.len() != self.group.rank() || self.group.exponent() % chi.order() != 0 {
            return Err(Error::InvalidInput("character does not belong to this group".into()));
        }
        let n = chi.target_order;
        let mut raw = vec![BigInt::zero(); n as usize];
        for (&i, c) in &self.coeffs {
            let e = chi.exponent_at(&self.group.from_index(i)) as usize;
            raw[e] += c;
        }
        let v = CycloInt::reduce(n, raw);
        Ok(match self.ring.modulus() {
            None => v,
            Some(m) => v.mod_int(&m),
        })
    }

    /// Push forward along G -> G/H.
    pub fn project(&self, proj: &Projection) -> Result<Self> {
        if proj.matrix.len() != self.group.rank() {
            return Err(Error::InvalidInput("projection source does not match the group".into()));
        }
        let mut x = Self::zero(&proj.target, self.ring);
        for (&i, c) in &self.coeffs {
            let h = proj.apply(&self.group.from_index(i));
            x.add_term(proj.target.index(&h), c.clone());
        }
        Ok(x)
    }

    /// Dense coefficient vector indexed by element index.
    pub fn dense(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.group.order() as usize];
        for (&i, c) in &self.coeffs {
            v[i] = c.clone();
        }
        v
    }

    pub fn from_dense(group: &AbelianGroup, ring: CoefficientRing, v: &[BigInt]) -> Self {
        let mut x = Self::zero(group, ring);
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                x.add_term(i, c.clone());
            }
        }
        x
    }

    /// JSON form: list of (element tuple, coefficient string).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms()
                .map(|(g, c)| serde_json::json!([g, c.to_string()]))
                .collect(),
        )
    }

    pub fn from_json(group: &AbelianGroup, ring: CoefficientRing, v: &serde_json::Value) -> Result<Self> {
        let bad = || Error::Parse("group ring element must be a list of [tuple, string]".into());
        let mut x = Self::zero(group, ring);
        for t in v.as_array().ok_or_else(bad)? {
            let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let g: GElem = serde_json::from_value(pair[0].clone()).map_err(|_| bad())?;
            if g.len() != group.rank() {
                return Err(bad());
            }
            let c: BigInt = pair[1].as_str().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            x.add_term(group.index(&g), c);
        }
        Ok(x)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(g, c)| {
                if g.iter().all(|&x| x == 0) {
                    return c.to_string();
                }
                let name = g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                format!("{c}[{name}]")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Truncated power series sum_{i <= D} c_i u^i over R[G].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingSeries {
    coeffs: Vec<GroupRingElement>,
}

impl GroupRingSeries {
    pub fn zero(group: &AbelianGroup, ring: CoefficientRing, truncation: usize) -> Self {
        GroupRingSeries { coeffs: vec![GroupRingElement::zero(group, ring); truncation + 1] }
    }

    pub fn one(group: &AbelianGroup, ring: CoefficientRing, truncation: usize) -> Self {
        let mut s = Self::zero(group, ring, truncation);
        s.coeffs[0] = GroupRingElement::one(group, ring);
        s
    }

    pub fn from_coeffs(coeffs: Vec<GroupRingElement>) -> Self {
        assert!(!coeffs.is_empty());
        GroupRingSeries { coeffs }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[GroupRingElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &GroupRingElement {
        &self.coeffs[i]
    }

    pub fn group(&self) -> &AbelianGroup {
        self.coeffs[0].group()
    }

    pub fn ring(&self) -> CoefficientRing {
        self.coeffs[0].ring()
    }

    pub fn add(&self, o: &Self) -> Self {
        GroupRingSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = self.truncation().min(o.truncation());
        let mut out = Self::zero(self.group(), self.ring(), d);
        for i in 0..=d {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=d - i {
                if !o.coeffs[j].is_zero() {
                    out.coeffs[i + j] = out.coeffs[i + j].add(&self.coeffs[i].mul(&o.coeffs[j]));
                }
            }
        }
        out
    }

    /// self * (1 - c g u^d).
    pub fn mul_one_minus(&self, g: &GElem, d: usize, c: &BigInt) -> Self {
        let mut out = self.clone();
        for i in (d..self.coeffs.len()).rev() {
            let t = self.coeffs[i - d].shift(g).scale(c);
            out.coeffs[i] = out.coeffs[i].sub(&t);
        }
        out
    }

    /// self * (1 - g u^d)^{-1}, via c'_n = c_n + g c'_{n-d}.
    pub fn div_one_minus(&self, g: &GElem, d: usize) -> Self {
        let mut out = self.clone();
        for i in d..self.coeffs.len() {
            let t = out.coeffs[i - d].shift(g);
            out.coeffs[i] = out.coeffs[i].add(&t);
        }
        out
    }

    /// Index of the last nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn truncate(&self, d: usize) -> Self {
        GroupRingSeries { coeffs: self.coeffs[..=d.min(self.truncation())].to_vec() }
    }

    /// Substitutes u = 1 (meaningful for polynomials).
    pub fn eval_at_one(&self) -> GroupRingElement {
        self.coeffs.iter().fold(GroupRingElement::zero(self.group(), self.ring()), |a, b| a.add(b))
    }

    pub fn project(&self, proj: &Projection) -> Result<Self> {
        Ok(GroupRingSeries { coeffs: self.coeffs.iter().map(|c| c.project(proj)).collect::<Result<_>>()? })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| serde_json::json!({"degree": i, "coefficient": c.to_json()}))
                .collect(),
        )
    }
}

/// Position of an element in the augmentation filtration of (Z/p^N)[G].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentationForm {
    /// Largest n <= bound with x in I^n.
    pub order: usize,
    /// True when x lies in I^{bound+1} as well, so `order` is only a
    /// lower bound.
    pub saturated: bool,
    /// Coordinates of the class of x in I^n/I^{n+1} on the degree-n
    /// monomials prod (sigma_i - 1)^{a_i}, listed in `monomials`.
    pub leading_form: Vec<BigInt>,
    pub monomials: Vec<Vec<u32>>,
}

fn monomials_of_degree(r: usize, n: u32) -> Vec<Vec<u32>> {
    if r == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for a in (0..=n).rev() {
        for mut rest in monomials_of_degree(r - 1, n - a) {
            let mut m = vec![a];
            m.append(&mut rest);
            out.push(m);
        }
    }
    out
}

fn t_element(group: &AbelianGroup, ring: CoefficientRing, i: usize) -> GroupRingElement {
    GroupRingElement::monomial(group, ring, &group.basis(i), BigInt::one())
        .sub(&GroupRingElement::one(group, ring))
}

fn monomial_element(group: &AbelianGroup, ring: CoefficientRing, a: &[u32]) -> GroupRingElement {
    let mut x = GroupRingElement::one(group, ring);
    for (i, &k) in a.iter().enumerate() {
        let t = t_element(group, ring, i);
        for _ in 0..k {
            x = x.mul(&t);
        }
    }
    x
}

/// Determines the augmentation order of x in (Z/p^N)[G] for a p-group G.
pub fn augmentation_analysis(x: &GroupRingElement, bound: usize) -> Result<AugmentationForm> {
    let CoefficientRing::ModPPower { p, n: prec } = x.ring() else {
        return Err(Error::InvalidInput("augmentation analysis needs Z/p^N coefficients".into()));
    };
    let group = x.group().clone();
    let ord = group.order();
    let mut o = ord;
    while o % p == 0 {
        o /= p;
    }
    if o != 1 {
        return Err(Error::InvalidInput(format!("G of order {ord} is not a {p}-group")));
    }
    let ring = x.ring();
    let size = ord as usize;
    let r = group.rank();
    let ts: Vec<GroupRingElement> = (0..r).map(|i| t_element(&group, ring, i)).collect();
    // spanning sets of I^k as Z/p^N-modules, I^{k+1} = sum_i I^k t_i
    let unit_rows = (0..size)
        .map(|i| (0..size).map(|j| BigInt::from(u8::from(i == j))).collect())
        .collect();
    let mut levels: Vec<ModEchelon> = vec![ModEchelon::new(unit_rows, size, p, prec)];
    let mut k = 0usize;
    let xd = x.dense();
    while k < bound + 1 && levels[k].contains(&xd) {
        let mut next = Vec::new();
        for (_, row) in levels[k].pivots() {
            let e = GroupRingElement::from_dense(&group, ring, row);
            for t in &ts {
                next.push(e.mul(t).dense());
            }
        }
        levels.push(ModEchelon::new(next, size, p, prec));
        k += 1;
    }
    let order = k.saturating_sub(1);
    let saturated = k == bound + 1 && levels[k].contains(&xd);
    if saturated && !x.is_zero() && bound == 0 {
        return Err(Error::Inconclusive("bound exceeded".into()));
    }
    let mons = monomials_of_degree(r, order as u32);
    let leading_form = if saturated {
        vec![BigInt::zero(); mons.len()]
    } else {
        // rows [vec(m) | e_m] for monomials, [vec(y) | 0] for y in I^{n+1}
        let width = size + mons.len();
        let mut rows = Vec::new();
        for (j, a) in mons.iter().enumerate() {
            let mut v = monomial_element(&group, ring, a).dense();
            v.resize(width, BigInt::zero());
            v[size + j] = BigInt::one();
            rows.push(v);
        }
        for (_, y) in levels[order + 1].pivots() {
            let mut v = y.clone();
            v.resize(width, BigInt::zero());
            rows.push(v);
        }
        let ech = ModEchelon::new(rows, width, p, prec);
        let mut target = xd.clone();
        target.resize(width, BigInt::zero());
        let rem = ech.reduce(&target);
        if rem[..size].iter().any(|c| !c.is_zero()) {
            return Err(Error::Inconsistency("element not in the span of degree-n monomials".into()));
        }
        let m = ring.modulus().unwrap();
        rem[size..].iter().map(|c| (-c).mod_floor(&m)).collect()
    };
    Ok(AugmentationForm { order, saturated, leading_form, monomials: mons })
}
