//! Finite abelian groups in invariant-factor form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::{smith, Mat};

pub type GElem = Vec<i64>;

/// Z/d_1 x ... x Z/d_m with d_1 | d_2 | ... | d_m, all d_i >= 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    divisors: Vec<u64>,
}

impl AbelianGroup {
    pub fn new(divisors: Vec<u64>) -> Result<Self> {
        if divisors.iter().any(|&d| d < 2) {
            return Err(Error::InvalidInput("elementary divisors must be >= 2".into()));
        }
        if divisors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidInput(format!("{divisors:?} is not a divisibility chain")));
        }
        Ok(AbelianGroup { divisors })
    }

    pub fn trivial() -> Self {
        AbelianGroup { divisors: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            AbelianGroup { divisors: vec![n] }
        }
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    pub fn order(&self) -> u64 {
        self.divisors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.divisors.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.divisors.is_empty()
    }

    pub fn zero(&self) -> GElem {
        vec![0; self.rank()]
    }

    pub fn basis(&self, i: usize) -> GElem {
        let mut g = self.zero();
        g[i] = 1;
        g
    }

    pub fn normalize(&self, g: &mut GElem) {
        for (x, &d) in g.iter_mut().zip(&self.divisors) {
            *x = x.rem_euclid(d as i64);
        }
    }

    pub fn add(&self, a: &GElem, b: &GElem) -> GElem {
        let mut c: GElem = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.normalize(&mut c);
        c
    }

    pub fn sub(&self, a: &GElem, b: &GElem) -> GElem {
        let mut c: GElem = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.normalize(&mut c);
        c
    }

    pub fn neg(&self, a: &GElem) -> GElem {
        self.sub(&self.zero(), a)
    }

    pub fn scale(&self, a: &GElem, k: i64) -> GElem {
        let mut c: GElem = a
            .iter()
            .zip(&self.divisors)
            .map(|(&x, &d)| ((x as i128 * k as i128).rem_euclid(d as i128)) as i64)
            .collect();
        self.normalize(&mut c);
        c
    }

    pub fn is_zero(&self, a: &GElem) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Mixed-radix index, first coordinate least significant.
    pub fn index(&self, g: &GElem) -> usize {
        let mut idx = 0usize;
        for (x, &d) in g.iter().zip(&self.divisors).rev() {
            idx = idx * d as usize + x.rem_euclid(d as i64) as usize;
        }
        idx
    }

    pub fn from_index(&self, mut idx: usize) -> GElem {
        self.divisors
            .iter()
            .map(|&d| {
                let x = idx % d as usize;
                idx /= d as usize;
                x as i64
            })
            .collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = GElem> + '_ {
        (0..self.order() as usize).map(move |i| self.from_index(i))
    }

    pub fn element_order(&self, g: &GElem) -> u64 {
        g.iter()
            .zip(&self.divisors)
            .map(|(&x, &d)| d / num_integer::gcd(x as u64, d))
            .fold(1, num_integer::lcm)
    }

    /// Indices of the subgroup generated by `gens`, sorted.
    pub fn closure(&self, gens: &[GElem]) -> Vec<usize> {
        let n = self.order() as usize;
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![self.zero()];
        while let Some(g) = stack.pop() {
            for h in gens {
                let s = self.add(&g, h);
                let i = self.index(&s);
                if !seen[i] {
                    seen[i] = true;
                    stack.push(s);
                }
            }
        }
        (0..n).filter(|&i| seen[i]).collect()
    }

    /// True when the given set of elements is closed under addition and
    /// contains zero.
    pub fn is_subgroup(&self, set: &[GElem]) -> bool {
        let idx: std::collections::HashSet<usize> = set.iter().map(|g| self.index(g)).collect();
        idx.contains(&0)
            && set.iter().all(|a| set.iter().all(|b| idx.contains(&self.index(&self.add(a, b)))))
    }
}

/// A homomorphism Z^n -> target given by an integer matrix (rows = source
/// generators).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub target: AbelianGroup,
    pub matrix: Vec<Vec<i64>>,
}

impl Projection {
    pub fn apply(&self, x: &[i64]) -> GElem {
        let d = self.target.divisors();
        let mut out = vec![0i128; d.len()];
        for (xi, row) in x.iter().zip(&self.matrix) {
            for ((o, &r), &dj) in out.iter_mut().zip(row).zip(d) {
                *o = (*o + *xi as i128 * r as i128).rem_euclid(dj as i128);
            }
        }
        out.into_iter().map(|v| v as i64).collect()
    }
}

/// The finite group Z^n / <relations>. Returns the group, the projection
/// from Z^n, and for each invariant factor a preimage in Z^n.
pub fn from_relations(n: usize, relations: &[Vec<i64>]) -> Result<(AbelianGroup, Projection, Vec<Vec<i64>>)> {
    let a: Mat = relations.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let s = smith(&a, n);
    if s.rank < n {
        return Err(Error::InvalidInput("presentation defines an infinite group".into()));
    }
    let keep: Vec<usize> = (0..n).filter(|&j| s.diag[j] != 1).collect();
    let divisors: Vec<u64> = keep.iter().map(|&j| s.diag[j] as u64).collect();
    let target = AbelianGroup::new(divisors.clone())?;
    let matrix = (0..n)
        .map(|i| {
            keep.iter()
                .zip(&divisors)
                .map(|(&j, &d)| s.v[i][j].rem_euclid(d as i128) as i64)
                .collect()
        })
        .collect();
    let lifts = keep.iter().map(|&j| s.v_inv[j].iter().map(|&x| x as i64).collect()).collect();
    Ok((target.clone(), Projection { target, matrix }, lifts))
}

/// G / <gens> together with the projection from G (as a map on
/// coordinates).
pub fn quotient(g: &AbelianGroup, gens: &[GElem]) -> Result<(AbelianGroup, Projection)> {
    let n = g.rank();
    let mut rel: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut r = vec![0; n];
            r[i] = g.divisors[i] as i64;
            r
        })
        .collect();
    rel.extend(gens.iter().cloned());
    let (t, p, _) = from_relations(n, &rel)?;
    Ok((t, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_structure() {
        let g = AbelianGroup::new(vec![2, 4]).unwrap();
        assert_eq!(g.order(), 8);
        assert_eq!(g.exponent(), 4);
        assert!(AbelianGroup::new(vec![4, 2]).is_err());
        assert!(AbelianGroup::new(vec![1]).is_err());
        for i in 0..8 {
            assert_eq!(g.index(&g.from_index(i)), i);
        }
        assert_eq!(g.element_order(&vec![1, 1]), 4);
        assert_eq!(g.element_order(&vec![1, 2]), 2);
    }

    #[test]
    fn presentations() {
        // Z^2 / <(2,0),(0,3)> = Z/6
        let (g, p, lifts) = from_relations(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(g.divisors(), &[6]);
        assert!(g.is_zero(&p.apply(&[2, 0])));
        assert!(g.is_zero(&p.apply(&[0, 3])));
        assert_eq!(g.element_order(&p.apply(&[1, 1])), 6);
        assert_eq!(p.apply(&lifts[0]), vec![1]);
        assert!(from_relations(2, &[vec![2, 0]]).is_err());
    }

    #[test]
    fn quotients() {
        let g = AbelianGroup::new(vec![2, 4]).unwrap();
        let (q, p) = quotient(&g, &[vec![0, 2]]).unwrap();
        assert_eq!(q.order(), 4);
        assert_eq!(q.divisors(), &[2, 2]);
        assert!(q.is_zero(&p.apply(&[0, 2])));
        let (q, _) = quotient(&g, &[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(q.is_trivial());
        let (q, _) = quotient(&g, &[]).unwrap();
        assert_eq!(q, g);
    }

    proptest! {
        #[test]
        fn quotient_order_matches_closure(d in proptest::sample::select(vec![vec![6u64], vec![2, 2], vec![2, 6], vec![3, 9], vec![2, 4, 8]]), seed in proptest::collection::vec(0i64..100, 6)) {
            let g = AbelianGroup::new(d).unwrap();
            let r = g.rank();
            let gens: Vec<GElem> = seed.chunks(r).take(2).map(|c| { let mut x = c.to_vec(); x.resize(r, 0); g.normalize(&mut x); x }).collect();
            let h = g.closure(&gens);
            let (q, p) = quotient(&g, &gens).unwrap();
            prop_assert_eq!(q.order() * h.len() as u64, g.order());
            for &i in &h {
                prop_assert!(q.is_zero(&p.apply(&g.from_index(i))));
            }
            // homomorphism
            let a = g.from_index(seed[0] as usize % g.order() as usize);
            let b = g.from_index(seed[1] as usize % g.order() as usize);
            prop_assert_eq!(p.apply(&g.add(&a, &b)), q.add(&p.apply(&a), &p.apply(&b)));
        }
    }
}
