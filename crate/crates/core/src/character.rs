//! Characters of finite abelian groups with values in Z[zeta_N].

use crate::cyclo::CycloInt;
use crate::group::{AbelianGroup, GElem};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    /// N; values lie in mu_N.
    pub target_order: u64,
    /// chi(e_i) = zeta_N^{exponents[i]}.
    pub exponents: Vec<i64>,
}

impl Character {
    pub fn trivial(g: &AbelianGroup) -> Self {
        Character { target_order: g.exponent(), exponents: vec![0; g.rank()] }
    }

    /// chi(g) as an exponent of zeta_N.
    pub fn exponent_at(&self, g: &GElem) -> i64 {
        let n = self.target_order as i128;
        g.iter()
            .zip(&self.exponents)
            .map(|(&x, &a)| x as i128 * a as i128)
            .sum::<i128>()
            .rem_euclid(n) as i64
    }

    pub fn eval(&self, g: &GElem) -> CycloInt {
        CycloInt::zeta_pow(self.target_order, self.exponent_at(g))
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&a| a.rem_euclid(self.target_order as i64) == 0)
    }

    pub fn order(&self) -> u64 {
        let n = self.target_order;
        self.exponents
            .iter()
            .map(|&a| n / num_integer::gcd(a.rem_euclid(n as i64) as u64, n))
            .fold(1, num_integer::lcm)
    }

    /// True when chi vanishes on every given element.
    pub fn kills(&self, gens: &[GElem]) -> bool {
        gens.iter().all(|g| self.exponent_at(g) == 0)
    }

    /// chi composed with a homomorphism h: H -> G given by images of H's
    /// generators.
    pub fn pullback(&self, images: &[GElem], target_order: u64) -> Character {
        let scale = target_order as i64 / self.target_order as i64;
        Character {
            target_order,
            exponents: images.iter().map(|g| self.exponent_at(g) * scale).collect(),
        }
    }
}

/// All |G| characters, indexed like the elements of G (dual basis).
pub fn characters(g: &AbelianGroup) -> Vec<Character> {
    let n = g.exponent();
    g.elements()
        .map(|k| Character {
            target_order: n,
            exponents: k.iter().zip(g.divisors()).map(|(&ki, &d)| ki * (n / d) as i64).collect(),
        })
        .collect()
}
