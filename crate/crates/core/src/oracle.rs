//! Verification paths that avoid the closed symbol formulas: conic solvability
//! by exhaustive search with Hensel lifting, the genus formula through local
//! norm indices, ray class orders of ℚ, and reduced binary quadratic forms.

use std::collections::HashSet;

use serde::Serialize;

use crate::arith::{factor_squarefree, factorize, mul_mod, pow_mod, Place, F2};
use crate::error::{Error, Result};
use crate::genus::{ramification_set, row_subgroup, ProblemInstance};
use crate::governing::{dlog_table, governing_basis, PlaceSets};
use crate::linalg::{congruence_kernel, rank_fp, MatrixFp};

// Below this size squares mod q are enumerated; above it Euler's criterion decides.
const SQUARE_TABLE_LIMIT: u64 = 1 << 14;

struct Squares {
    q: u64,
    table: Option<Vec<bool>>,
}

impl Squares {
    fn new(q: u64) -> Squares {
        let table = (q < SQUARE_TABLE_LIMIT).then(|| {
            let mut t = vec![false; q as usize];
            for x in 0..q {
                t[(x * x % q) as usize] = true;
            }
            t
        });
        Squares { q, table }
    }

    // Whether r is a square mod q (0 counts).
    fn contains(&self, r: u64) -> bool {
        let r = r % self.q;
        match &self.table {
            Some(t) => t[r as usize],
            None => r == 0 || pow_mod(r, (self.q - 1) / 2, self.q) == 1,
        }
    }
}

fn inverse_mod(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

// Isotropy over ℚ_q (q odd) of c0·X² + c1·Y² + c2·Z² with nonzero integer coefficients.
fn isotropic_odd(coeffs: [i128; 3], q: u64) -> bool {
    let qi = q as i128;
    let strip = |mut c: i128| {
        while c % (qi * qi) == 0 {
            c /= qi * qi;
        }
        c
    };
    let mut c = coeffs.map(strip);
    let count = |c: &[i128; 3]| c.iter().filter(|&&x| x % qi == 0).count();
    match count(&c) {
        3 => c = c.map(|x| x / qi),
        // Scaling the form by q makes the two divisible coefficients units.
        2 => c = c.map(|x| strip(x * qi)),
        _ => {}
    }
    let res = |x: i128| x.rem_euclid(qi) as u64;
    let squares = Squares::new(q);
    match c.iter().position(|&x| x % qi == 0) {
        None => {
            // A nonzero point mod q has a unit coordinate, hence a unit partial derivative.
            let (a, b, z) = (res(c[0]), res(c[1]), res(c[2]));
            let inv_b = inverse_mod(b, q);
            // Z = 0: a·X² + b·Y² ≡ 0 with X, Y both units
            if squares.contains(mul_mod(q - b, inverse_mod(a, q), q)) {
                return true;
            }
            // Z = 1: b·Y² ≡ −(a·X² + z)
            (0..q).any(|x| {
                let rhs = (q - (mul_mod(a, mul_mod(x, x, q), q) + z) % q) % q;
                squares.contains(mul_mod(rhs, inv_b, q))
            })
        }
        Some(h) => {
            // Any primitive solution has the two unit-coefficient coordinates not both
            // divisible by q, and such a point mod q lifts.
            let (i, j) = match h {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (a, b) = (res(c[i]), res(c[j]));
            squares.contains(mul_mod(q - b, inverse_mod(a, q), q))
        }
    }
}

fn v2(x: i128) -> u32 {
    x.trailing_zeros()
}

// Isotropy over ℚ₂: search for a primitive point P mod 32 with f(P) ≡ 0 mod 2^(2e+1),
// where 2^e exactly divides the smallest partial derivative at P.
fn isotropic_two(coeffs: [i128; 3]) -> bool {
    let c = coeffs.map(|mut x| {
        while x % 4 == 0 {
            x /= 4;
        }
        x
    });
    let vc = c.map(v2);
    for x in 0..32i128 {
        for y in 0..32i128 {
            for z in 0..32i128 {
                if x % 2 == 0 && y % 2 == 0 && z % 2 == 0 {
                    continue;
                }
                let p = [x, y, z];
                let e = (0..3).filter(|&i| p[i] != 0).map(|i| 1 + vc[i] + v2(p[i])).min().expect("primitive point");
                if e > 2 {
                    continue;
                }
                let f: i128 = (0..3).map(|i| c[i] * p[i] * p[i]).sum();
                if f.rem_euclid(1 << (2 * e + 1)) == 0 {
                    return true;
                }
            }
        }
    }
    false
}

/// (a, b)_v decided by whether z² = a·x² + b·y² has a nontrivial solution in ℚ_v.
pub fn hilbert_bruteforce(a: i64, b: i64, v: Place) -> Result<F2> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroArgument);
    }
    let coeffs = [a as i128, b as i128, -1];
    let solvable = match v {
        Place::Infinity => a > 0 || b > 0,
        Place::Two => isotropic_two(coeffs),
        Place::OddPrime(q) => isotropic_odd(coeffs, q.get()),
    };
    Ok(F2::new(!solvable as u8))
}

// Whether d is a square in ℚ_v, for d prime to v.
fn is_local_square(d: i64, v: Place) -> bool {
    match v {
        Place::Infinity => d > 0,
        Place::Two => {
            let odd_squares: HashSet<i64> = (1..64).step_by(2).map(|x: i64| x * x % 64).collect();
            odd_squares.contains(&d.rem_euclid(64))
        }
        Place::OddPrime(q) => Squares::new(q.get()).contains(d.rem_euclid(q.get() as i64) as u64),
    }
}

/// Θ recomputed entrywise as Hilbert symbols (w, d)_v, on the same rows and columns.
pub fn build_matrix_hilbert(inst: &ProblemInstance) -> Result<MatrixFp> {
    let wt = row_subgroup(inst)?;
    let cols = inst.columns();
    let mut entries = Vec::with_capacity(wt.dim() * cols.len());
    for w in wt.witnesses() {
        let rep = w.square_class_rep();
        for &v in &cols {
            entries.push(hilbert_bruteforce(rep, inst.d(), v)?.bit());
        }
    }
    MatrixFp::new(
        2,
        wt.dim(),
        cols.len(),
        entries,
        wt.witnesses().iter().map(|w| w.to_string()).collect(),
        cols.iter().map(|v| v.label()).collect(),
    )
}

/// Breakdown of the genus formula computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FormulaGenus {
    pub non_split_s: usize,
    pub sigma: usize,
    pub norm_index_log2: usize,
    pub log2_g: u32,
    pub g: u64,
}

/// log₂ g = #S^ns + #Σ′ − log₂ (E^S_T : E^S_T ∩ N), with the norm index read off the
/// local symbols at every place of Σ ∪ S ∪ {2, ∞}.
pub fn genus_formula_details(inst: &ProblemInstance) -> Result<FormulaGenus> {
    let d = inst.d();
    let places = inst.places();
    let sigma = ramification_set(d)?;
    let mut all: Vec<Place> = Vec::new();
    for p in sigma.iter().chain(places.s0()).chain(&[2]) {
        let v = Place::prime(*p)?;
        if !all.contains(&v) {
            all.push(v);
        }
    }
    all.push(Place::Infinity);

    let in_s = |v: Place| match v {
        Place::Infinity => places.s_inf(),
        _ => places.s0().contains(&v.prime_number().expect("finite")),
    };
    let wt = row_subgroup(inst)?;
    let reps: Vec<i64> = wt.witnesses().iter().map(|w| w.square_class_rep()).collect();

    let mut counted_cols: Vec<Vec<u8>> = Vec::new();
    let mut non_split_s = 0;
    for &v in &all {
        let column = reps.iter().map(|&w| hilbert_bruteforce(w, d, v).map(F2::bit)).collect::<Result<Vec<u8>>>()?;
        let ramified = v.prime_number().is_some_and(|p| sigma.contains(&p));
        let counted = if ramified {
            true
        } else if in_s(v) && !is_local_square(d, v) {
            non_split_s += 1;
            true
        } else {
            false
        };
        if counted {
            counted_cols.push(column);
        } else if column.iter().any(|&e| e != 0) {
            return Err(Error::Internal(format!("nonzero norm symbol at uncounted place {v} for d = {d}")));
        }
    }
    let ncols = counted_cols.len();
    let rows: Vec<Vec<u8>> = (0..reps.len()).map(|r| counted_cols.iter().map(|c| c[r]).collect()).collect();
    let rank = rank_fp(&MatrixFp::from_rows(2, ncols, &rows)?);
    let log2_g = (non_split_s + sigma.len() - rank) as u32;
    let g = 1u64.checked_shl(log2_g).filter(|_| log2_g < 64).ok_or(Error::Overflow("genus number"))?;
    Ok(FormulaGenus { non_split_s, sigma: sigma.len(), norm_index_log2: rank, log2_g, g })
}

pub fn genus_via_formula(inst: &ProblemInstance) -> Result<u64> {
    genus_formula_details(inst).map(|f| f.g)
}

// Largest modulus for which the subgroup is enumerated element by element.
const CLOSURE_LIMIT: u64 = 1 << 22;

/// Order of the S-ray class group of ℚ modulo the squarefree odd m.
pub fn ray_class_order(m: u64, places: &PlaceSets) -> Result<u64> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::ValueOutOfRange(format!("modulus {m} must be odd and positive")));
    }
    if let Some(&l) = places.s0().iter().find(|&&l| m.is_multiple_of(l)) {
        return Err(Error::NotCoprime(m as i64, l));
    }
    if m == 1 {
        return Ok(1);
    }
    let mut gens: Vec<u64> = places.s0().iter().map(|&l| l % m).collect();
    if places.s_inf() {
        gens.push(m - 1);
    }
    if m <= CLOSURE_LIMIT {
        return Ok(ray_class_order_closure(m, &gens));
    }
    // Large moduli: |H| is the index of the relation lattice of the generators.
    let t: Vec<u64> = factorize(m).into_iter().map(|(p, _)| p).collect();
    let basis = governing_basis(&PlaceSets::new(places.s0().to_vec(), places.s_inf(), t.clone())?);
    let (dlogs, orders) = dlog_table(&basis, &t)?;
    let kernel = congruence_kernel(&dlogs, basis.dim(), &orders)?;
    let subgroup: u128 = (0..basis.dim()).map(|i| kernel[i][i] as u128).product();
    let phi: u128 = t.iter().map(|&p| (p - 1) as u128).product();
    Ok((phi / subgroup) as u64)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ray_class_order_closure(m: u64, gens: &[u64]) -> u64 {
    let phi = (1..m).filter(|&x| gcd(x, m) == 1).count() as u64;
    let mut seen = vec![false; m as usize];
    seen[1] = true;
    let mut frontier = vec![1u64];
    let mut size = 1u64;
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = mul_mod(x, g, m);
            if !seen[y as usize] {
                seen[y as usize] = true;
                size += 1;
                frontier.push(y);
            }
        }
    }
    phi / size
}

/// A positive definite binary quadratic form a·x² + b·xy + c·y².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BQForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BQForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_ambiguous(&self) -> bool {
        self.b == 0 || self.a == self.b || self.a == self.c
    }
}

pub fn is_fundamental_discriminant(disc: i64) -> bool {
    if disc == 1 || disc == 0 {
        return false;
    }
    match disc.rem_euclid(4) {
        1 => factor_squarefree(disc).is_ok(),
        0 => {
            let m = disc / 4;
            matches!(m.rem_euclid(4), 2 | 3) && factor_squarefree(m).is_ok()
        }
        _ => false,
    }
}

/// All reduced forms of the negative discriminant `disc`.
pub fn reduced_forms(disc: i64) -> Vec<BQForm> {
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in -a..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = BQForm { a, b, c: num / (4 * a) };
            if f.is_reduced() {
                forms.push(f);
            }
        }
        a += 1;
    }
    forms
}

/// Class number and number of ambiguous reduced forms of a negative fundamental discriminant.
pub fn bqf_class_data(disc: i64) -> Result<(u64, u64)> {
    if disc >= 0 || !is_fundamental_discriminant(disc) {
        return Err(Error::NotFundamental(disc));
    }
    let forms = reduced_forms(disc);
    let ambiguous = forms.iter().filter(|f| f.is_ambiguous()).count();
    Ok((forms.len() as u64, ambiguous as u64))
}

/// Discriminant of ℚ(√d) for squarefree d.
pub fn field_discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}
