//! Governing-field data for K = ℚ and p = 2.
//!
//! The governing group Γ^S is dual to E^S/(E^S)², which has the basis
//! (−1 if ∞ ∈ S, then the primes of S0 ascending). Frobenius vectors and the
//! congruence subgroup W_T are expressed in coordinates over that basis.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::arith::{factorize, is_prime, legendre_add, pow_mod};
use crate::error::{Error, Result};
use crate::linalg::{congruence_kernel, kernel_basis_fp, MatrixFp};

/// Largest prime accepted in T.
pub const MAX_T_PRIME: u64 = 1_000_000;

/// The place sets S = S0 ∪ S∞ and T.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlaceSets {
    s0: Vec<u64>,
    s_inf: bool,
    t: Vec<u64>,
}

impl PlaceSets {
    /// Sorts and validates the sets.
    pub fn new(mut s0: Vec<u64>, s_inf: bool, mut t: Vec<u64>) -> Result<PlaceSets> {
        s0.sort_unstable();
        t.sort_unstable();
        let bad = |msg: String| Err(Error::InvalidPlaceSets(msg));
        if s0.windows(2).any(|w| w[0] == w[1]) || t.windows(2).any(|w| w[0] == w[1]) {
            return bad("repeated prime".into());
        }
        if let Some(p) = s0.iter().chain(&t).find(|&&p| !is_prime(p)) {
            return bad(format!("{p} is not prime"));
        }
        if t.contains(&2) {
            return bad("T must contain odd primes only".into());
        }
        if let Some(p) = t.iter().find(|&&p| p > MAX_T_PRIME) {
            return bad(format!("T prime {p} exceeds {MAX_T_PRIME}"));
        }
        if let Some(p) = t.iter().find(|p| s0.contains(p)) {
            return bad(format!("{p} lies in both S0 and T"));
        }
        Ok(PlaceSets { s0, s_inf, t })
    }

    pub fn s0(&self) -> &[u64] {
        &self.s0
    }

    pub fn s_inf(&self) -> bool {
        self.s_inf
    }

    pub fn t(&self) -> &[u64] {
        &self.t
    }

    /// The same S0 and T with the archimedean flag replaced.
    pub fn with_s_inf(&self, s_inf: bool) -> PlaceSets {
        PlaceSets { s_inf, ..self.clone() }
    }

    /// The modulus ∏T, if it fits.
    pub fn modulus(&self) -> Result<u64> {
        self.t.iter().try_fold(1u64, |acc, &t| acc.checked_mul(t)).ok_or(Error::Overflow("product of T"))
    }
}

/// Ordered generators of E^S modulo squares.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoverningBasis {
    gens: Vec<i64>,
}

impl GoverningBasis {
    pub fn gens(&self) -> &[i64] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    /// Coordinate index of −1, present iff ∞ ∈ S.
    pub fn sign_index(&self) -> Option<usize> {
        (self.gens.first() == Some(&-1)).then_some(0)
    }

    /// Coordinate index of the prime `p`.
    pub fn prime_index(&self, p: u64) -> Option<usize> {
        self.gens.iter().position(|&g| g == p as i64)
    }

    pub fn labels(&self) -> Vec<String> {
        self.gens.iter().map(i64::to_string).collect()
    }
}

pub fn governing_basis(places: &PlaceSets) -> GoverningBasis {
    let mut gens = Vec::with_capacity(places.s0.len() + 1);
    if places.s_inf {
        gens.push(-1);
    }
    gens.extend(places.s0.iter().map(|&p| p as i64));
    GoverningBasis { gens }
}

/// Frobenius of the odd prime q in Γ^S: the additive Legendre symbols of the generators at q.
pub fn frobenius_vector(q: u64, basis: &GoverningBasis) -> Result<Vec<u8>> {
    if q == 2 || basis.gens.iter().any(|&g| g != -1 && g.unsigned_abs() % q == 0) {
        return Err(Error::RamifiedInGoverning(q));
    }
    basis.gens.iter().map(|&g| legendre_add(g, q).map(|s| s.bit())).collect()
}

/// Smallest primitive root modulo the odd prime q.
pub fn primitive_root(q: u64) -> u64 {
    let factors = factorize(q - 1);
    (2..q).find(|&g| factors.iter().all(|&(f, _)| pow_mod(g, (q - 1) / f, q) != 1)).unwrap_or(1)
}

/// Discrete logarithm of `a` (coprime to q) to base `g` modulo q by baby-step giant-step.
pub fn discrete_log(a: u64, g: u64, q: u64) -> Option<u64> {
    let n = q - 1;
    let a = a % q;
    let m = (n as f64).sqrt().ceil() as u64 + 1;
    let mut baby = HashMap::with_capacity(m as usize);
    let mut e = 1u64;
    for j in 0..m {
        baby.entry(e).or_insert(j);
        e = crate::arith::mul_mod(e, g, q);
    }
    let giant = pow_mod(pow_mod(g, m, q), q - 2, q);
    let mut y = a;
    for i in 0..m {
        if let Some(&j) = baby.get(&y) {
            return Some((i * m + j) % n);
        }
        y = crate::arith::mul_mod(y, giant, q);
    }
    None
}

/// An element of E^S_T, stored as integer exponents over the governing basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    gens: Vec<i64>,
    exponents: Vec<i64>,
}

impl Witness {
    pub fn new(basis: &GoverningBasis, exponents: Vec<i64>) -> Witness {
        assert_eq!(basis.dim(), exponents.len());
        Witness { gens: basis.gens.clone(), exponents }
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    /// Coordinates modulo squares.
    pub fn bits(&self) -> Vec<u8> {
        self.exponents.iter().map(|e| e.rem_euclid(2) as u8).collect()
    }

    pub fn is_negative(&self) -> bool {
        self.gens.iter().zip(&self.exponents).any(|(&g, &e)| g == -1 && e.rem_euclid(2) == 1)
    }

    /// The integer value, if every exponent is nonnegative and it fits in i128.
    pub fn value(&self) -> Option<i128> {
        let mut acc: i128 = 1;
        for (&g, &e) in self.gens.iter().zip(&self.exponents) {
            let e = u32::try_from(e).ok()?;
            acc = acc.checked_mul((g as i128).checked_pow(e)?)?;
        }
        Some(acc)
    }

    /// Squarefree representative of the square class: the product of generators with odd exponent.
    pub fn square_class_rep(&self) -> i64 {
        self.gens.iter().zip(&self.exponents).filter(|(_, &e)| e.rem_euclid(2) == 1).map(|(&g, _)| g).product()
    }

    /// Residue modulo an odd prime q not dividing any generator.
    pub fn residue_mod(&self, q: u64) -> u64 {
        self.gens.iter().zip(&self.exponents).fold(1u64, |acc, (&g, &e)| {
            let g = (g as i128).rem_euclid(q as i128) as u64;
            let f = if e >= 0 { pow_mod(g, e as u64, q) } else { pow_mod(pow_mod(g, q - 2, q), e.unsigned_abs(), q) };
            crate::arith::mul_mod(acc, f, q)
        })
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.value() {
            return write!(f, "{v}");
        }
        let parts: Vec<String> = self
            .gens
            .iter()
            .zip(&self.exponents)
            .filter(|(_, &e)| e != 0)
            .map(|(&g, &e)| if e == 1 { format!("{g}") } else { format!("{g}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// The image W_T of E^S_T in E^S/(E^S)², with one witness per basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupWT {
    ambient_dim: usize,
    basis: Vec<Vec<u8>>,
    witnesses: Vec<Witness>,
}

impl SubgroupWT {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.witnesses
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        let m = MatrixFp::from_rows(2, self.ambient_dim, &rows).expect("consistent dimensions");
        crate::linalg::rank_fp(&m) == self.dim()
    }
}

fn check_t(basis: &GoverningBasis, t: &[u64]) -> Result<()> {
    for &q in t {
        if q == 2 || !is_prime(q) || q > MAX_T_PRIME {
            return Err(Error::InvalidPlaceSets(format!("T entry {q} must be an odd prime ≤ {MAX_T_PRIME}")));
        }
        if basis.prime_index(q).is_some() {
            return Err(Error::InvalidPlaceSets(format!("{q} lies in both S0 and T")));
        }
    }
    Ok(())
}

// Multiplicative order of each generator in ∏ (ℤ/t)^×.
fn generator_orders(basis: &GoverningBasis, t: &[u64]) -> Vec<u64> {
    basis
        .gens
        .iter()
        .map(|&g| {
            t.iter().fold(1u64, |acc, &q| {
                let x = (g as i128).rem_euclid(q as i128) as u64;
                let mut ord = q - 1;
                for (f, _) in factorize(q - 1) {
                    while ord % f == 0 && pow_mod(x, ord / f, q) == 1 {
                        ord /= f;
                    }
                }
                acc / gcd(acc, ord) * ord
            })
        })
        .collect()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Discrete logarithms of the generators in each (ℤ/t)^×, one row per t, together with the orders t − 1.
pub fn dlog_table(basis: &GoverningBasis, t: &[u64]) -> Result<(Vec<Vec<i64>>, Vec<u64>)> {
    let mut rows = Vec::with_capacity(t.len());
    for &q in t {
        let g = primitive_root(q);
        let row = basis
            .gens
            .iter()
            .map(|&a| {
                let a = (a as i128).rem_euclid(q as i128) as u64;
                discrete_log(a, g, q)
                    .map(|l| l as i64)
                    .ok_or_else(|| Error::Internal(format!("no discrete log of {a} mod {q}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((rows, t.iter().map(|&q| q - 1).collect()))
}

/// The exact subspace W_T with witnesses, from the integer congruence kernel.
pub fn wt_subgroup(basis: &GoverningBasis, t: &[u64]) -> Result<SubgroupWT> {
    check_t(basis, t)?;
    let n = basis.dim();
    let (dlogs, orders) = dlog_table(basis, t)?;
    let kernel = congruence_kernel(&dlogs, n, &orders)?;

    // F₂ elimination on the parities, carrying integer lattice vectors along.
    let mut rows: Vec<(Vec<u8>, Vec<i64>)> =
        kernel.into_iter().map(|v| (v.iter().map(|e| e.rem_euclid(2) as u8).collect(), v)).collect();
    let mut r = 0;
    for c in 0..n {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i].0[c] == 1) else {
            continue;
        };
        rows.swap(r, pr);
        let (pbits, pvec) = rows[r].clone();
        for (i, (bits, vec)) in rows.iter_mut().enumerate() {
            if i != r && bits[c] == 1 {
                for (b, pb) in bits.iter_mut().zip(&pbits) {
                    *b ^= pb;
                }
                for (e, pe) in vec.iter_mut().zip(&pvec) {
                    *e = e.checked_sub(*pe).ok_or(Error::Overflow("witness exponent"))?;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);

    // Shrink exponents modulo an even multiple of each generator's order; parity and
    // the congruences are preserved.
    let orders = generator_orders(basis, t);
    let (basis_bits, witnesses) = rows
        .into_iter()
        .map(|(bits, vec)| {
            let exps = vec
                .iter()
                .zip(&orders)
                .map(|(&e, &o)| {
                    let period = if o % 2 == 0 { o } else { 2 * o } as i64;
                    e.rem_euclid(period)
                })
                .collect();
            (bits, Witness::new(basis, exps))
        })
        .unzip();
    Ok(SubgroupWT { ambient_dim: n, basis: basis_bits, witnesses })
}

/// Result of the Frobenius-quotient shortcut for dim Γ_T^S.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientDim {
    Dim(usize),
    /// The Frobenius vectors of T are dependent, so the quotient formula does not apply.
    IndependenceFailure,
}

/// dim Γ^S − #T when the Frobenius vectors of T are independent.
pub fn gamma_dim_quotient(basis: &GoverningBasis, t: &[u64]) -> Result<QuotientDim> {
    let frobs = t.iter().map(|&q| frobenius_vector(q, basis)).collect::<Result<Vec<_>>>()?;
    let m = MatrixFp::from_rows(2, basis.dim(), &frobs)?;
    if crate::linalg::rank_fp(&m) == t.len() {
        Ok(QuotientDim::Dim(basis.dim() - t.len()))
    } else {
        Ok(QuotientDim::IndependenceFailure)
    }
}

/// The vectors of E^S/(E^S)² pairing trivially with every Frobenius of T.
pub fn frobenius_annihilator(basis: &GoverningBasis, t: &[u64]) -> Result<Vec<Vec<u8>>> {
    let frobs = t.iter().map(|&q| frobenius_vector(q, basis)).collect::<Result<Vec<_>>>()?;
    let m = MatrixFp::from_rows(2, basis.dim(), &frobs)?;
    Ok(kernel_basis_fp(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(s0: &[u64], s_inf: bool) -> GoverningBasis {
        governing_basis(&PlaceSets::new(s0.to_vec(), s_inf, vec![]).unwrap())
    }

    #[test]
    fn basis_examples() {
        assert_eq!(basis(&[], true).gens(), &[-1]);
        assert_eq!(basis(&[3], true).gens(), &[-1, 3]);
        assert_eq!(basis(&[5, 2], false).gens(), &[2, 5]);
        assert_eq!(basis(&[5, 2], false).sign_index(), None);
        assert_eq!(basis(&[3], true).prime_index(3), Some(1));
    }

    #[test]
    fn place_set_validation() {
        assert!(PlaceSets::new(vec![3, 3], true, vec![]).is_err());
        assert!(PlaceSets::new(vec![4], true, vec![]).is_err());
        assert!(PlaceSets::new(vec![], true, vec![2]).is_err());
        assert!(PlaceSets::new(vec![5], true, vec![5]).is_err());
        assert!(PlaceSets::new(vec![], true, vec![1_000_003]).is_err());
        assert_eq!(PlaceSets::new(vec![7, 3], false, vec![13, 5]).unwrap().t(), &[5, 13]);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_vector(13, &basis(&[3], true)).unwrap(), vec![0, 0]);
        assert_eq!(frobenius_vector(7, &basis(&[3], true)).unwrap(), vec![1, 1]);
        for l in [5u64, 13, 17, 29] {
            assert_eq!(frobenius_vector(l, &basis(&[], true)).unwrap(), vec![0]);
        }
        assert!(matches!(frobenius_vector(3, &basis(&[3], true)), Err(Error::RamifiedInGoverning(3))));
        assert!(matches!(frobenius_vector(2, &basis(&[], true)), Err(Error::RamifiedInGoverning(2))));
    }

    #[test]
    fn discrete_logs() {
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(41), 6);
        for q in [3u64, 5, 7, 11, 101, 997, 65_537] {
            let g = primitive_root(q);
            for a in (1..q).step_by((q / 50).max(1) as usize) {
                let l = discrete_log(a, g, q).unwrap();
                assert_eq!(pow_mod(g, l, q), a);
            }
        }
    }

    #[test]
    fn wt_examples() {
        let b = basis(&[3], true);
        let full = wt_subgroup(&b, &[]).unwrap();
        assert_eq!(full.basis(), &[vec![1, 0], vec![0, 1]]);
        assert_eq!(full.witnesses().iter().map(|w| w.to_string()).collect::<Vec<_>>(), ["-1", "3"]);

        let trivial = wt_subgroup(&basis(&[], true), &[5]).unwrap();
        assert_eq!(trivial.dim(), 0);

        let w = wt_subgroup(&basis(&[2], true), &[5]).unwrap();
        assert_eq!(w.basis(), &[vec![1, 0]]);
        assert_eq!(w.witnesses()[0].value(), Some(-4));
        assert_eq!(w.witnesses()[0].to_string(), "-4");
    }

    #[test]
    fn quotient_examples() {
        assert_eq!(gamma_dim_quotient(&basis(&[2], true), &[5]).unwrap(), QuotientDim::Dim(1));
        assert_eq!(gamma_dim_quotient(&basis(&[], true), &[5]).unwrap(), QuotientDim::IndependenceFailure);
        assert_eq!(gamma_dim_quotient(&basis(&[], true), &[]).unwrap(), QuotientDim::Dim(1));
        assert!(gamma_dim_quotient(&basis(&[3], true), &[3]).is_err());
    }

    fn random_sets(rng: &mut ChaCha8Rng) -> (Vec<u64>, Vec<u64>) {
        let primes: Vec<u64> = (2..100).filter(|&p| is_prime(p)).collect();
        let ns0 = rng.gen_range(0..=3);
        let nt = rng.gen_range(0..=2);
        let mut s0: Vec<u64> = Vec::new();
        while s0.len() < ns0 {
            let p = primes[rng.gen_range(0..primes.len())];
            if !s0.contains(&p) {
                s0.push(p);
            }
        }
        let mut t: Vec<u64> = Vec::new();
        while t.len() < nt {
            let p = primes[rng.gen_range(1..primes.len())];
            if !s0.contains(&p) && !t.contains(&p) {
                t.push(p);
            }
        }
        (s0, t)
    }

    #[test]
    fn witnesses_satisfy_congruences_and_annihilator_containment() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (s0, t) = random_sets(&mut rng);
            let places = PlaceSets::new(s0, rng.gen_bool(0.5), t.clone()).unwrap();
            let b = governing_basis(&places);
            let wt = wt_subgroup(&b, places.t()).unwrap();
            for (bits, w) in wt.basis().iter().zip(wt.witnesses()) {
                assert_eq!(&w.bits(), bits);
                for &q in places.t() {
                    assert_eq!(w.residue_mod(q), 1, "witness {w} mod {q}");
                }
            }
            let ann = frobenius_annihilator(&b, places.t()).unwrap();
            for v in wt.basis() {
                let m = MatrixFp::from_rows(2, b.dim(), &ann).unwrap();
                let mut rows = ann.clone();
                rows.push(v.clone());
                let m2 = MatrixFp::from_rows(2, b.dim(), &rows).unwrap();
                assert_eq!(crate::linalg::rank_fp(&m), crate::linalg::rank_fp(&m2));
            }
            match gamma_dim_quotient(&b, places.t()).unwrap() {
                QuotientDim::Dim(k) => {
                    assert_eq!(wt.dim(), k);
                    assert_eq!(ann.len(), k);
                }
                // W_T can still fill the annihilator, e.g. basis [3] with T = {13}
                QuotientDim::IndependenceFailure => assert!(wt.dim() <= ann.len()),
            }
        }
    }

    #[test]
    fn dependent_frobenius_with_full_subgroup() {
        let b = basis(&[3], false);
        assert_eq!(gamma_dim_quotient(&b, &[13]).unwrap(), QuotientDim::IndependenceFailure);
        assert_eq!(wt_subgroup(&b, &[13]).unwrap().dim(), 1);
    }

    #[test]
    fn many_generators_and_moduli_stay_in_range() {
        let b = basis(&[5, 7, 11], true);
        let mut prev = b.dim();
        for t in [vec![43u64], vec![43, 59], vec![43, 59, 67], vec![43, 59, 67, 71, 73, 79]] {
            let wt = wt_subgroup(&b, &t).unwrap();
            assert!(wt.dim() <= prev);
            prev = wt.dim();
        }
    }

    #[test]
    fn wt_matches_exhaustive_exponent_search() {
        // brute force: a parity vector lies in W_T iff some exponent vector with
        // entries in [0, 2·lcm(t-1)) of that parity is ≡ 1 mod every t
        for (s0, s_inf, t) in [
            (vec![2u64, 3], true, vec![5u64]),
            (vec![3], true, vec![7, 13]),
            (vec![2, 7], false, vec![17]),
            (vec![5, 11], true, vec![3, 19]),
        ] {
            let places = PlaceSets::new(s0, s_inf, t).unwrap();
            let b = governing_basis(&places);
            let wt = wt_subgroup(&b, places.t()).unwrap();
            let bound: i64 = 2 * places.t().iter().fold(1, |acc, &q| acc * (q as i64 - 1));
            for mask in 0..(1u32 << b.dim()) {
                let bits: Vec<u8> = (0..b.dim()).map(|j| (mask >> j & 1) as u8).collect();
                let mut found = false;
                let mut exps = vec![0i64; b.dim()];
                'search: loop {
                    if exps.iter().zip(&bits).all(|(e, &bt)| e.rem_euclid(2) as u8 == bt) {
                        let w = Witness::new(&b, exps.clone());
                        if places.t().iter().all(|&q| w.residue_mod(q) == 1) {
                            found = true;
                            break 'search;
                        }
                    }
                    let mut i = 0;
                    loop {
                        if i == exps.len() {
                            break 'search;
                        }
                        exps[i] += 1;
                        if exps[i] < bound {
                            break;
                        }
                        exps[i] = 0;
                        i += 1;
                    }
                }
                assert_eq!(found, wt.contains(&bits), "{:?} {:?}", b.gens(), bits);
            }
        }
    }
}
