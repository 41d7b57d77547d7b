//! Integer linear algebra: Smith normal form with transforms, integer
//! kernels, exact determinants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Mat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// `u * a * v = diag`, `u` and `v` unimodular, diagonal entries
/// non-negative with each dividing the next.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diag: Vec<i128>,
    pub u: Mat,
    pub v: Mat,
    /// Inverse of `v`.
    pub v_inv: Mat,
    pub rank: usize,
}

fn swap_rows(a: &mut Mat, i: usize, j: usize) {
    a.swap(i, j);
}
fn swap_cols(a: &mut Mat, i: usize, j: usize) {
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}
/// row_i += k * row_j
fn add_row(a: &mut Mat, i: usize, j: usize, k: i128) {
    if k == 0 {
        return;
    }
    let rj = a[j].clone();
    for (x, y) in a[i].iter_mut().zip(rj) {
        *x += k * y;
    }
}
/// col_i += k * col_j
fn add_col(a: &mut Mat, i: usize, j: usize, k: i128) {
    if k == 0 {
        return;
    }
    for row in a.iter_mut() {
        row[i] += k * row[j];
    }
}

pub fn smith(a: &Mat, cols: usize) -> Smith {
    let m = a.len();
    let n = cols;
    let mut d = a.clone();
    let mut u = identity(m);
    let mut v = identity(n);
    let mut v_inv = identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if d[i][j] != 0 && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        swap_rows(&mut d, t, bi);
        swap_rows(&mut u, t, bi);
        swap_cols(&mut d, t, bj);
        swap_cols(&mut v, t, bj);
        swap_rows(&mut v_inv, t, bj);
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                let k = d[i][t].div_euclid(d[t][t]);
                if k != 0 {
                    add_row(&mut d, i, t, -k);
                    add_row(&mut u, i, t, -k);
                }
                if d[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                let k = d[t][j].div_euclid(d[t][t]);
                if k != 0 {
                    add_col(&mut d, j, t, -k);
                    add_col(&mut v, j, t, -k);
                    add_row(&mut v_inv, t, j, k);
                }
                if d[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                // divisibility of the rest of the block by the pivot
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| d[i][j] % d[t][t] != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        add_row(&mut d, t, i, 1);
                        add_row(&mut u, t, i, 1);
                        continue;
                    }
                }
            }
            // move the smallest entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t..m {
                if d[i][t] != 0 && d[i][t].abs() < d[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..n {
                if d[t][j] != 0 && d[t][j].abs() < d[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                swap_rows(&mut d, t, best.0);
                swap_rows(&mut u, t, best.0);
            }
            if best.1 != t {
                swap_cols(&mut d, t, best.1);
                swap_cols(&mut v, t, best.1);
                swap_rows(&mut v_inv, t, best.1);
            }
        }
        if d[t][t] < 0 {
            for x in d[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
        t += 1;
    }
    let diag: Vec<i128> = (0..m.min(n)).map(|i| d[i][i]).collect();
    let rank = diag.iter().filter(|&&x| x != 0).count();
    Smith { diag, u, v, v_inv, rank }
}

/// Basis (as rows) of the integer kernel {x : a x = 0}.
pub fn kernel(a: &Mat, cols: usize) -> Vec<Vec<i128>> {
    let s = smith(a, cols);
    (s.rank..cols)
        .map(|j| (0..cols).map(|i| s.v[i][j]).collect())
        .collect()
}

/// Exact determinant by fraction-free elimination.
pub fn det_bigint(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = val / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

pub fn det_i128(a: &Mat) -> i128 {
    let big: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    i128::try_from(det_bigint(&big)).expect("determinant fits i128")
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

/// Row echelon form over Z/p^N (a Howell-style form): the span of the
/// returned rows equals the Z/p^N-span of the input rows.
#[derive(Clone, Debug)]
pub struct ModEchelon {
    modulus: BigInt,
    p: BigInt,
    /// (pivot column, row) pairs, pivot entries are powers of p.
    rows: Vec<(usize, Vec<BigInt>)>,
    cols: usize,
}

pub fn p_valuation(x: &BigInt, p: &BigInt) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

impl ModEchelon {
    pub fn new(rows: Vec<Vec<BigInt>>, cols: usize, p: u64, n: u32) -> Self {
        let p = BigInt::from(p);
        let modulus = p.pow(n);
        let mut pending: Vec<Vec<BigInt>> =
            rows.into_iter().map(|r| r.into_iter().map(|x| x.mod_floor(&modulus)).collect()).collect();
        let mut out = Vec::new();
        for col in 0..cols {
            // pick the pending row with the smallest valuation at `col`
            let mut best: Option<(usize, u32)> = None;
            for (i, r) in pending.iter().enumerate() {
                if let Some(v) = p_valuation(&r[col], &p) {
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((i, v));
                    }
                }
            }
            let Some((bi, bv)) = best else { continue };
            let mut pivot = pending.swap_remove(bi);
            // normalise pivot entry to p^bv
            let unit = &pivot[col] / p.pow(bv);
            let inv = mod_inverse(&unit, &modulus);
            for x in pivot.iter_mut() {
                *x = (&*x * &inv).mod_floor(&modulus);
            }
            let pv = p.pow(bv);
            for r in pending.iter_mut() {
                if r[col].is_zero() {
                    continue;
                }
                let k = &r[col] / &pv;
                for (x, y) in r.iter_mut().zip(&pivot) {
                    *x = (&*x - &k * y).mod_floor(&modulus);
                }
            }
            // the annihilator multiple of the pivot row stays in the module
            let ann = p.pow(n - bv);
            let extra: Vec<BigInt> = pivot.iter().map(|x| (x * &ann).mod_floor(&modulus)).collect();
            if extra.iter().any(|x| !x.is_zero()) {
                pending.push(extra);
            }
            pending.retain(|r| r.iter().any(|x| !x.is_zero()));
            out.push((col, pivot));
        }
        ModEchelon { modulus, p, rows: out, cols }
    }

    /// Reduces `x` against the echelon rows, returning the remainder.
    pub fn reduce(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut r: Vec<BigInt> = x.iter().map(|v| v.mod_floor(&self.modulus)).collect();
        for (col, row) in &self.rows {
            if r[*col].is_zero() {
                continue;
            }
            let piv = &row[*col];
            let (k, rem) = r[*col].div_rem(piv);
            if !rem.is_zero() {
                // not divisible: the remainder cannot be cleared
                continue;
            }
            for (a, b) in r.iter_mut().zip(row) {
                *a = (&*a - &k * b).mod_floor(&self.modulus);
            }
        }
        r
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.reduce(x).iter().all(|v| v.is_zero())
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pivots(&self) -> impl Iterator<Item = (usize, &Vec<BigInt>)> {
        self.rows.iter().map(|(c, r)| (*c, r))
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
}

pub fn bigint_abs(x: &BigInt) -> BigInt {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_smith(a: &Mat, cols: usize) {
        let s = smith(a, cols);
        let d = mat_mul(&mat_mul(&s.u, a), &s.v);
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(x, s.diag[i]);
                } else {
                    assert_eq!(x, 0);
                }
            }
        }
        for w in s.diag.windows(2) {
            if w[1] != 0 {
                assert_eq!(w[1] % w[0], 0);
            }
        }
        assert_eq!(det_i128(&s.u).abs(), 1);
        assert_eq!(mat_mul(&s.v, &s.v_inv), identity(cols));
        assert_eq!(det_i128(&s.v).abs(), 1);
    }

    #[test]
    fn smith_known() {
        let a = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let s = smith(&a, 3);
        assert_eq!(s.diag, vec![2, 6, 12]);
        check_smith(&a, 3);
    }

    #[test]
    fn kernel_known() {
        let a = vec![vec![1, 2, 3]];
        let k = kernel(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(v[0] + 2 * v[1] + 3 * v[2], 0);
        }
    }

    #[test]
    fn det_known() {
        let a: Vec<Vec<BigInt>> = vec![
            vec![2.into(), 0.into(), 1.into()],
            vec![1.into(), 3.into(), 2.into()],
            vec![1.into(), 1.into(), 2.into()],
        ];
        assert_eq!(det_bigint(&a), BigInt::from(6));
    }

    #[test]
    fn echelon_membership() {
        // span over Z/8 of (2, 1) contains (4, 2) and (0, 4)? (0,4) = 4*(2,1) - (8,0) = (0,4)
        let rows = vec![vec![BigInt::from(2), BigInt::from(1)]];
        let e = ModEchelon::new(rows, 2, 2, 3);
        assert!(e.contains(&[BigInt::from(4), BigInt::from(2)]));
        assert!(e.contains(&[BigInt::from(0), BigInt::from(4)]));
        assert!(!e.contains(&[BigInt::from(1), BigInt::from(0)]));
        assert!(!e.contains(&[BigInt::from(0), BigInt::from(1)]));
    }

    proptest! {
        #[test]
        fn smith_is_valid(entries in proptest::collection::vec(-20i128..20, 12)) {
            let a: Mat = entries.chunks(4).map(|c| c.to_vec()).collect();
            check_smith(&a, 4);
        }

        #[test]
        fn echelon_span_matches_brute_force(entries in proptest::collection::vec(0i64..9, 4), probe in proptest::collection::vec(0i64..9, 2)) {
            // over Z/9, span of two vectors in (Z/9)^2 by enumeration
            let rows: Vec<Vec<BigInt>> = entries.chunks(2).map(|c| c.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let e = ModEchelon::new(rows.clone(), 2, 3, 2);
            let mut found = false;
            for a in 0..9 {
                for b in 0..9 {
                    let v0 = (a * entries[0] + b * entries[2]) % 9;
                    let v1 = (a * entries[1] + b * entries[3]) % 9;
                    if v0 == probe[0] && v1 == probe[1] {
                        found = true;
                    }
                }
            }
            let probe: Vec<BigInt> = probe.iter().map(|&x| BigInt::from(x)).collect();
            prop_assert_eq!(e.contains(&probe), found);
        }
    }
}
