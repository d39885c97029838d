//! The genus matrix Θ of ℚ(√d) and the genus numbers g^S_T and (g^S_T)*.
//!
//! Rows of Θ are a basis of W_T (labelled by witnesses), columns are the places
//! of Σ ∪ S^ns in the fixed order: odd ramified primes ascending, 2 if ramified,
//! non-split finite S-places ascending, then ∞. Θ is read as a map from
//! F₂^columns to the dual of W_T, and g^S_T = 2^dim ker Θ.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::{factor_squarefree, legendre_add, splitting_type, Place, SplittingType, SquareClass2};
use crate::error::{Error, Result};
use crate::governing::{governing_basis, wt_subgroup, GoverningBasis, PlaceSets, SubgroupWT};
use crate::linalg::{kernel_basis_fp, rank_fp, MatrixFp};
use crate::oracle::ray_class_order;

/// A squarefree d together with the place sets S and T.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProblemInstance {
    d: i64,
    places: PlaceSets,
}

impl ProblemInstance {
    pub fn new(d: i64, places: PlaceSets) -> Result<ProblemInstance> {
        let sigma = ramification_set(d)?;
        let clash: Vec<u64> =
            sigma.iter().copied().filter(|p| places.s0().contains(p) || places.t().contains(p)).collect();
        if !clash.is_empty() {
            return Err(Error::Overlap(clash));
        }
        Ok(ProblemInstance { d, places })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn places(&self) -> &PlaceSets {
        &self.places
    }

    pub fn basis(&self) -> GoverningBasis {
        governing_basis(&self.places)
    }

    pub fn sigma(&self) -> Vec<u64> {
        ramification_set(self.d).expect("validated on construction")
    }

    /// Places of Σ ∪ S^ns in column order.
    pub fn columns(&self) -> Vec<Place> {
        let sigma = self.sigma();
        let mut cols: Vec<Place> = sigma.iter().filter(|&&p| p != 2).map(|&p| place(p)).collect();
        if sigma.contains(&2) {
            cols.push(Place::Two);
        }
        for &l in self.places.s0() {
            if splitting_type(self.d, place(l)).expect("validated") != SplittingType::Split {
                cols.push(place(l));
            }
        }
        if self.places.s_inf() && self.d < 0 {
            cols.push(Place::Infinity);
        }
        cols
    }
}

fn place(p: u64) -> Place {
    Place::prime(p).expect("prime by construction")
}

/// The finite primes ramified in ℚ(√d), ascending.
pub fn ramification_set(d: i64) -> Result<Vec<u64>> {
    if d == 0 || d == 1 {
        return Err(Error::InvalidDiscriminant(d));
    }
    let (_, primes) = factor_squarefree(d)?;
    let mut sigma: Vec<u64> = primes.into_iter().filter(|&p| p != 2).collect();
    if d.rem_euclid(4) != 1 {
        sigma.insert(0, 2);
    }
    Ok(sigma)
}

/// Unit square classes of ℚ₂ that are norms from ℚ₂(√d).
///
/// A unit norm is the norm of a unit, so it suffices to list norms of
/// 2-adic integers x + y·ω mod 64, with ω = √d when d ≢ 1 (mod 4) and
/// ω = (1 + √d)/2 otherwise.
pub fn w2_norm_classes(d: i64) -> Result<BTreeSet<SquareClass2>> {
    if d == 0 || d == 1 {
        return Err(Error::InvalidDiscriminant(d));
    }
    factor_squarefree(d)?;
    let d = d as i128;
    let mut classes = BTreeSet::new();
    for x in 0..64i128 {
        for y in 0..64i128 {
            let norm = if d.rem_euclid(4) == 1 { x * x + x * y + y * y * ((1 - d) / 4) } else { x * x - d * y * y };
            let n = norm.rem_euclid(64);
            if n % 2 == 1 {
                classes.insert(SquareClass2 { val2: 0, unit: (n % 8) as u8 });
            }
        }
    }
    Ok(classes)
}

/// The row space of Θ, shared by both matrix builders.
pub fn row_subgroup(inst: &ProblemInstance) -> Result<SubgroupWT> {
    wt_subgroup(&inst.basis(), inst.places.t())
}

/// Θ assembled from the local case rules at each column place.
pub fn build_matrix_caserule(inst: &ProblemInstance) -> Result<MatrixFp> {
    let basis = inst.basis();
    let wt = row_subgroup(inst)?;
    let cols = inst.columns();
    let w2 = if inst.sigma().contains(&2) { Some(w2_norm_classes(inst.d)?) } else { None };
    let mut entries = Vec::with_capacity(wt.dim() * cols.len());
    for bits in wt.basis() {
        for &v in &cols {
            entries.push(caserule_entry(inst, &basis, bits, v, w2.as_ref())?);
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

fn caserule_entry(
    inst: &ProblemInstance,
    basis: &GoverningBasis,
    bits: &[u8],
    v: Place,
    w2: Option<&BTreeSet<SquareClass2>>,
) -> Result<u8> {
    let gens = basis.gens();
    let active = || gens.iter().zip(bits).filter(|(_, &b)| b == 1).map(|(&g, _)| g);
    let ramified = v.prime_number().is_some_and(|p| inst.sigma().contains(&p));
    Ok(match v {
        // Frobenius of a tamely ramified prime: Legendre symbols of the generators.
        Place::OddPrime(q) if ramified => {
            let mut s = 0;
            for g in active() {
                s ^= legendre_add(g, q.get())?.bit();
            }
            s
        }
        // Wild ramification at 2: trivial iff the unit class lies in W₂.
        Place::Two if ramified => {
            let class =
                active().try_fold(SquareClass2 { val2: 0, unit: 1 }, |acc, g| SquareClass2::of(g).map(|c| acc * c))?;
            let norms = w2.ok_or_else(|| Error::Internal("missing W2 table".into()))?;
            (!norms.contains(&class)) as u8
        }
        // Inert S-place: parity of the valuation.
        Place::OddPrime(_) | Place::Two => {
            let p = v.prime_number().expect("finite place");
            let idx = basis
                .prime_index(p)
                .ok_or_else(|| Error::Internal(format!("column {p} is neither ramified nor in S0")))?;
            bits[idx]
        }
        // Non-split real place: the sign.
        Place::Infinity => basis.sign_index().map_or(0, |i| bits[i]),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceSplitting {
    pub place: String,
    pub kind: SplittingType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GenusReport {
    pub d: i64,
    pub sigma: Vec<u64>,
    pub matrix: MatrixFp,
    pub rank: usize,
    pub wt_dim: usize,
    pub log2_g: u32,
    pub g: u64,
    pub ray_class_order: u64,
    pub g_star: u64,
    /// log₂ g*, present when g* is a power of two.
    pub log2_g_star: Option<u32>,
    pub splitting: Vec<PlaceSplitting>,
    /// Each kernel vector of Θ as the set of column places it involves.
    pub kernel_basis: Vec<Vec<String>>,
}

fn pow2(e: u32) -> Result<u64> {
    1u64.checked_shl(e).filter(|_| e < 64).ok_or(Error::Overflow("genus number"))
}

pub fn genus_number(inst: &ProblemInstance) -> Result<GenusReport> {
    let matrix = build_matrix_caserule(inst)?;
    let rank = rank_fp(&matrix);
    let log2_g = (matrix.ncols() - rank) as u32;
    let g = pow2(log2_g)?;
    let h = ray_class_order(inst.places.modulus()?, &inst.places)?;
    let g_star = (g as u128 * h as u128 / 2) as u64;
    let log2_g_star = g_star.is_power_of_two().then(|| g_star.trailing_zeros());

    let mut split_places: Vec<Place> = inst.sigma().iter().map(|&p| place(p)).collect();
    for &p in inst.places.s0().iter().chain(inst.places.t()) {
        split_places.push(place(p));
    }
    if !split_places.contains(&Place::Two) {
        split_places.push(Place::Two);
    }
    split_places.push(Place::Infinity);
    let splitting = split_places
        .into_iter()
        .map(|v| Ok(PlaceSplitting { place: v.label(), kind: splitting_type(inst.d, v)? }))
        .collect::<Result<Vec<_>>>()?;

    let kernel_basis = kernel_basis_fp(&matrix)
        .iter()
        .map(|v| v.iter().zip(matrix.col_labels()).filter(|(&b, _)| b == 1).map(|(_, l)| l.clone()).collect())
        .collect();

    Ok(GenusReport {
        d: inst.d,
        sigma: inst.sigma(),
        wt_dim: matrix.nrows(),
        rank,
        log2_g,
        g,
        ray_class_order: h,
        g_star,
        log2_g_star,
        splitting,
        kernel_basis,
        matrix,
    })
}
