//! Exact linear algebra over small prime fields, plus integer kernels of
//! maps into products of cyclic groups.
//!
//! A matrix is read as a linear map F_p^ncols → F_p^nrows: column j is the
//! image of the j-th basis vector, so kernels live in F_p^ncols.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{is_prime, pow_mod};
use crate::error::{Error, Result};

/// A dense matrix over F_p with labelled rows and columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFp {
    p: u8,
    nrows: usize,
    ncols: usize,
    entries: Vec<u8>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl MatrixFp {
    pub fn new(
        p: u8,
        nrows: usize,
        ncols: usize,
        entries: Vec<u8>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<MatrixFp> {
        if !is_prime(p as u64) || p > 251 {
            return Err(Error::InvalidPlace(format!("field characteristic {p} is not a prime ≤ 251")));
        }
        if entries.len() != nrows * ncols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {nrows}x{ncols} matrix", entries.len())));
        }
        if row_labels.len() != nrows || col_labels.len() != ncols {
            return Err(Error::DimensionMismatch("label count does not match dimensions".into()));
        }
        if let Some(e) = entries.iter().find(|&&e| e >= p) {
            return Err(Error::ValueOutOfRange(format!("entry {e} is not reduced modulo {p}")));
        }
        Ok(MatrixFp { p, nrows, ncols, entries, row_labels, col_labels })
    }

    /// Builds a matrix from rows, with positional labels. Entries are reduced mod p.
    pub fn from_rows(p: u8, ncols: usize, rows: &[Vec<u8>]) -> Result<MatrixFp> {
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let entries = rows.iter().flatten().map(|&e| e % p.max(1)).collect();
        MatrixFp::new(
            p,
            rows.len(),
            ncols,
            entries,
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            (0..ncols).map(|j| format!("c{j}")).collect(),
        )
    }

    pub fn zeros(p: u8, nrows: usize, ncols: usize) -> Result<MatrixFp> {
        MatrixFp::from_rows(p, ncols, &vec![vec![0; ncols]; nrows])
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.entries[r * self.ncols + c]
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.entries[r * self.ncols..(r + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        (0..self.nrows).map(move |r| self.row(r))
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn transpose(&self) -> MatrixFp {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.ncols {
            for r in 0..self.nrows {
                entries.push(self.get(r, c));
            }
        }
        MatrixFp {
            p: self.p,
            nrows: self.ncols,
            ncols: self.nrows,
            entries,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// M·x for x ∈ F_p^ncols.
    pub fn apply(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.ncols);
        let p = self.p as u32;
        self.rows().map(|row| (row.iter().zip(x).map(|(&a, &b)| a as u32 * b as u32).sum::<u32>() % p) as u8).collect()
    }
}

impl Serialize for MatrixFp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[u8]> = self.rows().collect();
        let mut st = serializer.serialize_struct("MatrixFp", 6)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("nrows", &self.nrows)?;
        st.serialize_field("ncols", &self.ncols)?;
        st.serialize_field("rowLabels", &self.row_labels)?;
        st.serialize_field("colLabels", &self.col_labels)?;
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}

/// A subspace of F_p^ambient_dim given by an independent basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubspaceFp {
    p: u8,
    ambient_dim: usize,
    basis: Vec<Vec<u8>>,
}

impl SubspaceFp {
    pub fn new(p: u8, ambient_dim: usize, basis: Vec<Vec<u8>>) -> Result<SubspaceFp> {
        let m = MatrixFp::from_rows(p, ambient_dim, &basis)?;
        if rank_fp(&m) != basis.len() {
            return Err(Error::DimensionMismatch("subspace basis is not independent".into()));
        }
        Ok(SubspaceFp { p, ambient_dim, basis })
    }

    pub fn empty(p: u8, ambient_dim: usize) -> SubspaceFp {
        SubspaceFp { p, ambient_dim, basis: Vec::new() }
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        let m = MatrixFp::from_rows(self.p, self.ambient_dim, &rows).expect("consistent dimensions");
        rank_fp(&m) == self.dim()
    }
}

// Rows of an F₂ matrix packed into 64-bit words.
struct BitRows {
    rows: Vec<Vec<u64>>,
}

impl BitRows {
    fn from_matrix(m: &MatrixFp) -> BitRows {
        let words = m.ncols.div_ceil(64).max(1);
        let rows = m
            .rows()
            .map(|row| {
                let mut packed = vec![0u64; words];
                for (c, &e) in row.iter().enumerate() {
                    if e & 1 == 1 {
                        packed[c / 64] |= 1 << (c % 64);
                    }
                }
                packed
            })
            .collect();
        BitRows { rows }
    }

    fn bit(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    // Reduced row echelon form in place; returns the pivot columns.
    fn rref(&mut self, ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            let Some(pr) = (r..self.rows.len()).find(|&i| self.bit(i, c)) else {
                continue;
            };
            self.rows.swap(r, pr);
            let pivot_row = self.rows[r].clone();
            for i in 0..self.rows.len() {
                if i != r && self.bit(i, c) {
                    for (x, y) in self.rows[i].iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows.len() {
                break;
            }
        }
        pivots
    }
}

fn inv_mod(a: u8, p: u8) -> u8 {
    pow_mod(a as u64, p as u64 - 2, p as u64) as u8
}

// Generic small-p reduced row echelon form; returns the reduced rows and pivot columns.
fn rref_generic(m: &MatrixFp) -> (Vec<Vec<u8>>, Vec<usize>) {
    let p = m.p as u32;
    let mut rows: Vec<Vec<u8>> = m.rows().map(|r| r.to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = inv_mod(rows[r][c], m.p) as u32;
        for e in rows[r].iter_mut() {
            *e = (*e as u32 * inv % p) as u8;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            let f = row[c] as u32;
            if i != r && f != 0 {
                for (e, &pe) in row.iter_mut().zip(&pivot_row) {
                    *e = ((*e as u32 + (p - f) * pe as u32) % p) as u8;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (rows, pivots)
}

// Reduced rows (unpacked) and pivot columns, dispatching on the characteristic.
fn rref(m: &MatrixFp) -> (Vec<Vec<u8>>, Vec<usize>) {
    if m.p == 2 {
        let mut bits = BitRows::from_matrix(m);
        let pivots = bits.rref(m.ncols);
        let rows = (0..bits.rows.len()).map(|r| (0..m.ncols).map(|c| bits.bit(r, c) as u8).collect()).collect();
        (rows, pivots)
    } else {
        rref_generic(m)
    }
}

pub fn rank_fp(m: &MatrixFp) -> usize {
    if m.p == 2 {
        BitRows::from_matrix(m).rref(m.ncols).len()
    } else {
        rref_generic(m).1.len()
    }
}

/// Dimension of the kernel of M: F_p^ncols → F_p^nrows.
pub fn kernel_dim_fp(m: &MatrixFp) -> usize {
    m.ncols - rank_fp(m)
}

/// A kernel basis, one vector per free column in ascending order, each with a 1
/// at its free column and zeros at the other free columns.
pub fn kernel_basis_fp(m: &MatrixFp) -> Vec<Vec<u8>> {
    let (rows, pivots) = rref(m);
    let p = m.p;
    let free = (0..m.ncols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut v = vec![0u8; m.ncols];
        v[f] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - rows[r][f]) % p;
        }
        v
    })
    .collect()
}

/// Exponent e with #{x : A·x ∈ span(B)} = p^e.
pub fn preimage_count_exp(a: &MatrixFp, b: &SubspaceFp) -> Result<usize> {
    if a.p != b.p || a.nrows != b.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix over F_{} with {} rows vs subspace of F_{}^{}",
            a.p, a.nrows, b.p, b.ambient_dim
        )));
    }
    let ncols = a.ncols + b.dim();
    let rows: Vec<Vec<u8>> = (0..a.nrows)
        .map(|r| {
            let mut row = a.row(r).to_vec();
            row.extend(b.basis.iter().map(|v| v[r]));
            row
        })
        .collect();
    let augmented = MatrixFp::from_rows(a.p, ncols, &rows)?;
    Ok(a.ncols + b.dim() - rank_fp(&augmented))
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

// Moduli beyond this could overflow i128 products of two reduced entries.
const MAX_LATTICE_MODULUS: i128 = 1 << 62;

fn overflow() -> Error {
    Error::Overflow("integer elimination")
}

fn lin2(x: i128, u: i128, y: i128, v: i128) -> Result<i128> {
    x.checked_mul(u).and_then(|a| y.checked_mul(v).and_then(|b| a.checked_add(b))).ok_or_else(overflow)
}

// Replaces vectors (a, b) by (x·a + y·b, u·a + w·b), reducing every entry mod m.
fn combine_mod(a: &mut [i128], b: &mut [i128], (x, y, u, w): (i128, i128, i128, i128), m: i128) -> Result<()> {
    let (x, y, u, w) = (x.rem_euclid(m), y.rem_euclid(m), u.rem_euclid(m), w.rem_euclid(m));
    for (ea, eb) in a.iter_mut().zip(b.iter_mut()) {
        let na = lin2(x, *ea, y, *eb)?.rem_euclid(m);
        let nb = lin2(u, *ea, w, *eb)?.rem_euclid(m);
        *ea = na;
        *eb = nb;
    }
    Ok(())
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    ext_gcd(a, b).0
}

// Row-style Hermite normal form of the lattice spanned by `gens` and m·ℤ^n.
// All working entries stay in [0, m) because m·e_j may be subtracted at will.
fn hermite_normal_form_mod(gens: Vec<Vec<i128>>, n: usize, m: i128) -> Result<Vec<Vec<i128>>> {
    let mut work: Vec<Vec<i128>> = gens.into_iter().map(|g| g.into_iter().map(|e| e.rem_euclid(m)).collect()).collect();
    let mut basis: Vec<Vec<i128>> = Vec::with_capacity(n);
    for c in 0..n {
        let mut pivot = vec![0i128; n];
        pivot[c] = m;
        for row in work.iter_mut() {
            if row[c] == 0 {
                continue;
            }
            let (a, b) = (pivot[c], row[c]);
            let (g, x, y) = ext_gcd(a, b);
            combine_mod(&mut pivot, row, (x, y, -b / g, a / g), m)?;
            // Exact values in column c; g = m would otherwise be reduced to 0.
            pivot[c] = g;
            row[c] = 0;
        }
        work.retain(|r| r.iter().any(|&e| e != 0));
        basis.push(pivot);
    }
    for c in 0..n {
        let h = basis[c][c];
        for r in 0..c {
            let q = basis[r][c].div_euclid(h);
            if q == 0 {
                continue;
            }
            let (head, tail) = basis.split_at_mut(c);
            for (j, (e, &pe)) in head[r].iter_mut().zip(tail[0].iter()).enumerate() {
                *e = lin2(1, *e, -q, pe)?;
                if j > c {
                    *e = e.rem_euclid(m);
                }
            }
        }
    }
    Ok(basis)
}

/// Kernel of the map ℤ^ngens → ∏ ℤ/orders[i] sending generator j to the
/// column `dlogs[·][j]`, returned as the rows of its Hermite normal form.
///
/// The kernel is cut down one cyclic factor at a time. Each intermediate lattice
/// contains lcm(orders so far)·ℤ^ngens, so entries are kept reduced modulo that lcm.
pub fn congruence_kernel(dlogs: &[Vec<i64>], ngens: usize, orders: &[u64]) -> Result<Vec<Vec<i64>>> {
    if dlogs.len() != orders.len() || dlogs.iter().any(|r| r.len() != ngens) {
        return Err(Error::DimensionMismatch("dlog table does not match generators and orders".into()));
    }
    if orders.iter().any(|&o| o == 0 || o as i128 > MAX_LATTICE_MODULUS) {
        return Err(Error::ValueOutOfRange("cyclic orders must lie in [1, 2^62]".into()));
    }
    let n = ngens;
    let mut basis: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let mut modulus: i128 = 1;
    for (row, &o) in dlogs.iter().zip(orders) {
        let o = o as i128;
        modulus = (modulus / gcd_i128(modulus, o))
            .checked_mul(o)
            .filter(|&l| l <= MAX_LATTICE_MODULUS)
            .ok_or_else(overflow)?;
        let a: Vec<i128> = row.iter().map(|&x| (x as i128).rem_euclid(o)).collect();
        let values = basis
            .iter()
            .map(|b| b.iter().zip(&a).try_fold(0i128, |acc, (&bj, &aj)| Ok(lin2(1, acc, bj.rem_euclid(o), aj)? % o)))
            .collect::<Result<Vec<i128>>>()?;

        // Generators of {c : Σ c_k·values_k ≡ 0 mod o} by a running extended gcd, plus o·ℤ^n.
        let mut coeff_gens: Vec<Vec<i128>> = Vec::with_capacity(2 * n);
        let mut acc = vec![0i128; n];
        let mut g = o;
        for (k, &v) in values.iter().enumerate() {
            let (g2, x, y) = ext_gcd(g, v);
            let mut kern: Vec<i128> =
                acc.iter().map(|&e| (v / g2).checked_mul(e).ok_or_else(overflow)).collect::<Result<_>>()?;
            kern[k] -= g / g2;
            for (j, e) in acc.iter_mut().enumerate() {
                *e = lin2(x, *e, y, (j == k) as i128)?.rem_euclid(o);
            }
            coeff_gens.push(kern.into_iter().map(|e| e.rem_euclid(o)).collect());
            g = g2;
        }
        coeff_gens.extend((0..n).map(|k| (0..n).map(|j| if j == k { o } else { 0 }).collect()));

        let gens = coeff_gens
            .iter()
            .map(|c| {
                let mut x = vec![0i128; n];
                for (ck, bk) in c.iter().zip(&basis) {
                    if *ck == 0 {
                        continue;
                    }
                    for (xj, &bj) in x.iter_mut().zip(bk) {
                        *xj = lin2(1, *xj, *ck % modulus, bj)?.rem_euclid(modulus);
                    }
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        basis = hermite_normal_form_mod(gens, n, modulus)?;
    }
    basis
        .into_iter()
        .map(|row| {
            row.into_iter().map(|e| i64::try_from(e).map_err(|_| Error::Overflow("congruence kernel entry"))).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(p: u8, ncols: usize, rows: &[&[u8]]) -> MatrixFp {
        let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
        MatrixFp::from_rows(p, ncols, &rows).unwrap()
    }

    // Enumerates F_p^n in lexicographic order.
    fn all_vectors(p: u8, n: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out.into_iter().flat_map(|v| (0..p).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        out
    }

    fn brute_row_span_size(mat: &MatrixFp) -> usize {
        let mut span = std::collections::HashSet::new();
        for coeffs in all_vectors(mat.p(), mat.nrows()) {
            let v: Vec<u8> = (0..mat.ncols())
                .map(|c| {
                    (coeffs.iter().enumerate().map(|(r, &k)| k as u32 * mat.get(r, c) as u32).sum::<u32>()
                        % mat.p() as u32) as u8
                })
                .collect();
            span.insert(v);
        }
        span.len()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_fp(&m(2, 2, &[&[1, 0], &[0, 1]])), 2);
        assert_eq!(rank_fp(&m(2, 4, &[&[1, 1, 1, 1]])), 1);
        assert_eq!(rank_fp(&m(3, 3, &[&[1, 2, 0], &[2, 1, 0], &[0, 0, 2]])), 2);
        let wide = MatrixFp::from_rows(2, 130, &[vec![1; 130], vec![1; 130]]).unwrap();
        assert_eq!(rank_fp(&wide), 1);
    }

    #[test]
    fn random_f3_rank_matches_span_enumeration() {
        // fixed 4x4 matrices over F_3; the span size is 3^rank
        let cases: [[[u8; 4]; 4]; 3] = [
            [[1, 2, 0, 1], [2, 1, 1, 0], [0, 0, 2, 2], [1, 0, 0, 1]],
            [[1, 1, 1, 1], [2, 2, 2, 2], [0, 1, 2, 0], [1, 2, 0, 1]],
            [[0, 0, 0, 0], [2, 0, 1, 1], [1, 0, 2, 2], [0, 0, 0, 0]],
        ];
        for case in cases {
            let rows: Vec<Vec<u8>> = case.iter().map(|r| r.to_vec()).collect();
            let mat = MatrixFp::from_rows(3, 4, &rows).unwrap();
            assert_eq!(3usize.pow(rank_fp(&mat) as u32), brute_row_span_size(&mat));
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_dim_fp(&m(2, 2, &[&[0, 0]])), 2);
        assert_eq!(kernel_dim_fp(&m(2, 2, &[&[1, 0], &[0, 1]])), 0);
        assert_eq!(kernel_dim_fp(&m(2, 2, &[&[1, 1]])), 1);
        assert!(kernel_basis_fp(&m(2, 2, &[&[1, 0], &[0, 1]])).is_empty());
        assert_eq!(kernel_basis_fp(&m(2, 2, &[&[0, 0]])), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(kernel_basis_fp(&m(2, 2, &[&[1, 1]])), vec![vec![1, 1]]);
        assert_eq!(kernel_basis_fp(&m(3, 2, &[&[1, 1]])), vec![vec![2, 1]]);
        assert_eq!(kernel_dim_fp(&MatrixFp::zeros(2, 0, 3).unwrap()), 3);
    }

    #[test]
    fn preimage_examples() {
        let id = m(2, 2, &[&[1, 0], &[0, 1]]);
        assert_eq!(preimage_count_exp(&id, &SubspaceFp::empty(2, 2)).unwrap(), 0);
        let zero = m(2, 2, &[&[0, 0]]);
        assert_eq!(preimage_count_exp(&zero, &SubspaceFp::empty(2, 1)).unwrap(), 2);
        let ones = m(2, 2, &[&[1, 1]]);
        let full = SubspaceFp::new(2, 1, vec![vec![1]]).unwrap();
        assert_eq!(preimage_count_exp(&ones, &full).unwrap(), 2);
        assert!(matches!(preimage_count_exp(&ones, &SubspaceFp::empty(2, 2)), Err(Error::DimensionMismatch(_))));
        assert!(matches!(preimage_count_exp(&ones, &SubspaceFp::empty(3, 1)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn matrix_validation() {
        assert!(MatrixFp::new(4, 1, 1, vec![0], vec!["a".into()], vec!["b".into()]).is_err());
        assert!(MatrixFp::new(2, 1, 1, vec![2], vec!["a".into()], vec!["b".into()]).is_err());
        assert!(MatrixFp::new(2, 1, 2, vec![0], vec!["a".into()], vec!["b".into()]).is_err());
        assert!(MatrixFp::new(2, 1, 1, vec![1], vec![], vec!["b".into()]).is_err());
        assert!(SubspaceFp::new(2, 2, vec![vec![1, 1], vec![1, 1]]).is_err());
    }

    fn check_kernel_witness(dlogs: &[Vec<i64>], ngens: usize, orders: &[u64], kernel: &[Vec<i64>]) {
        for v in kernel {
            for (i, &o) in orders.iter().enumerate() {
                let s: i128 = (0..ngens).map(|j| dlogs[i][j] as i128 * v[j] as i128).sum();
                assert_eq!(s.rem_euclid(o as i128), 0);
            }
        }
    }

    #[test]
    fn congruence_kernel_examples() {
        assert_eq!(congruence_kernel(&[], 2, &[]).unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(congruence_kernel(&[vec![1]], 1, &[4]).unwrap(), vec![vec![4]]);
        // -1 = 2^2 and 2 = 2^1 in (Z/5)^x with primitive root 2
        let k = congruence_kernel(&[vec![2, 1]], 2, &[4]).unwrap();
        assert_eq!(k, vec![vec![1, 2], vec![0, 4]]);
        // the first row encodes -1 * 2^2 = -4 ≡ 1 mod 5
        assert_eq!((-4i64).rem_euclid(5), 1);
        assert!(congruence_kernel(&[vec![1]], 2, &[4]).is_err());
    }

    #[test]
    fn congruence_kernel_matches_enumeration() {
        // kernel index must equal the size of the image, counted by enumeration
        let dlogs = vec![vec![3, 5, 0], vec![1, 4, 6]];
        let orders = [6u64, 10];
        let k = congruence_kernel(&dlogs, 3, &orders).unwrap();
        check_kernel_witness(&dlogs, 3, &orders, &k);
        let det: i64 = (0..3).map(|i| k[i][i]).product();
        let mut image = std::collections::HashSet::new();
        for x in 0..60i64 {
            for y in 0..60i64 {
                for z in 0..60i64 {
                    image.insert(((3 * x + 5 * y) % 6, (x + 4 * y + 6 * z) % 10));
                }
            }
        }
        assert_eq!(det as usize, image.len());
    }

    proptest! {
        #[test]
        fn kernel_size_matches_enumeration(
            p in prop::sample::select(vec![2u8, 3]),
            nrows in 0usize..5,
            ncols in 0usize..5,
            seed in prop::collection::vec(0u8..255, 16),
        ) {
            let rows: Vec<Vec<u8>> = (0..nrows)
                .map(|r| (0..ncols).map(|c| seed[r * 4 + c] % p).collect())
                .collect();
            let mat = MatrixFp::from_rows(p, ncols, &rows).unwrap();
            let count = all_vectors(p, ncols).iter().filter(|x| mat.apply(x).iter().all(|&e| e == 0)).count();
            prop_assert_eq!(count, (p as usize).pow(kernel_dim_fp(&mat) as u32));
            prop_assert_eq!(rank_fp(&mat), rank_fp(&mat.transpose()));
            prop_assert_eq!(preimage_count_exp(&mat, &SubspaceFp::empty(p, nrows)).unwrap(), kernel_dim_fp(&mat));
            let basis = kernel_basis_fp(&mat);
            prop_assert_eq!(basis.len(), kernel_dim_fp(&mat));
            for v in &basis {
                prop_assert!(mat.apply(v).iter().all(|&e| e == 0));
            }
            let stacked = MatrixFp::from_rows(p, ncols, &basis).unwrap();
            prop_assert_eq!(rank_fp(&stacked), basis.len());
        }

        #[test]
        fn preimage_count_matches_enumeration(
            nrows in 1usize..4,
            ncols in 0usize..4,
            seed in prop::collection::vec(0u8..2, 24),
        ) {
            let rows: Vec<Vec<u8>> = (0..nrows).map(|r| (0..ncols).map(|c| seed[r * 4 + c]).collect()).collect();
            let a = MatrixFp::from_rows(2, ncols, &rows).unwrap();
            let cand: Vec<Vec<u8>> = (0..2).map(|i| (0..nrows).map(|r| seed[16 + i * 4 + r]).collect()).collect();
            let cm = MatrixFp::from_rows(2, nrows, &cand).unwrap();
            let (reduced, pivots) = rref(&cm);
            let b = SubspaceFp::new(2, nrows, reduced[..pivots.len()].to_vec()).unwrap();
            let count = all_vectors(2, ncols).iter().filter(|x| b.contains(&a.apply(x))).count();
            prop_assert_eq!(count, 1usize << preimage_count_exp(&a, &b).unwrap());
        }

        #[test]
        fn congruence_kernel_vectors_are_relations(
            dl in prop::collection::vec(-50i64..50, 8),
            o1 in 1u64..40, o2 in 1u64..40, ngens in 1usize..4,
        ) {
            let dlogs = vec![dl[..ngens].to_vec(), dl[4..4 + ngens].to_vec()];
            let orders = [o1, o2];
            let k = congruence_kernel(&dlogs, ngens, &orders).unwrap();
            prop_assert_eq!(k.len(), ngens);
            check_kernel_witness(&dlogs, ngens, &orders, &k);
            // each scaled unit vector lcm·e_j lies in the lattice: triangular solve
            let l = (o1 * o2) as i64;
            for j in 0..ngens {
                let mut target: Vec<i64> = (0..ngens).map(|i| if i == j { l } else { 0 }).collect();
                for r in 0..ngens {
                    prop_assert_eq!(target[r] % k[r][r], 0);
                    let q = target[r] / k[r][r];
                    for c in 0..ngens {
                        target[c] -= q * k[r][c];
                    }
                }
                prop_assert!(target.iter().all(|&e| e == 0));
            }
        }
    }
}
