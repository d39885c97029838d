//! Construction of quadratic fields ℚ(√d) with prescribed ramification count m,
//! split at every place of S = S0 ∪ {∞}, and with genus number 2^k.
//!
//! With r = m − k, primes p₁,…,p_m are chosen whose Frobenius vectors in the
//! governing basis are e₁+⋯+e_r, e₁, …, e_r, 0, …, 0. These sum to zero, so
//! d = p₁⋯p_m is positive, ≡ 1 mod 4, and a square at every ℓ ∈ S0 by
//! reciprocity; the matrix Θ then has exactly these vectors as columns and
//! rank r. All of this is re-checked on the assembled d.

use serde::Serialize;

use crate::arith::{kronecker, SplittingType};
use crate::error::{Error, Result};
use crate::genus::{genus_number, ramification_set, GenusReport, ProblemInstance};
use crate::governing::{frobenius_vector, governing_basis, GoverningBasis, PlaceSets};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchSpec {
    places: PlaceSets,
    m: usize,
    k: usize,
    prime_budget: u64,
}

impl SearchSpec {
    /// Requires T = ∅, ∞ ∈ S, and max(1, m − r_S) ≤ k ≤ m with r_S = #S0 + 1.
    pub fn new(places: PlaceSets, m: usize, k: usize, prime_budget: u64) -> Result<SearchSpec> {
        if !places.t().is_empty() || !places.s_inf() {
            return Err(Error::InvalidPlaceSets("search needs T empty and the real place in S".into()));
        }
        if m == 0 {
            return Err(Error::InvalidRange("m must be at least 1".into()));
        }
        let r_s = places.s0().len() + 1;
        let lo = m.saturating_sub(r_s).max(1);
        if k < lo || k > m {
            return Err(Error::InvalidRange(format!("k = {k} outside [{lo}, {m}] for m = {m}, r_S = {r_s}")));
        }
        Ok(SearchSpec { places, m, k, prime_budget })
    }

    pub fn places(&self) -> &PlaceSets {
        &self.places
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn prime_budget(&self) -> u64 {
        self.prime_budget
    }

    pub fn r_s(&self) -> usize {
        self.places.s0().len() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchResult {
    pub sigma: Vec<u64>,
    pub d: i64,
    pub report: GenusReport,
    pub max_prime: u64,
}

/// Frobenius targets e₁+⋯+e_r, e₁, …, e_r, then zeros, in a space of dimension r_S.
pub fn plan_targets(spec: &SearchSpec) -> Vec<Vec<u8>> {
    let dim = spec.r_s();
    let r = spec.m - spec.k;
    let mut targets = Vec::with_capacity(spec.m);
    if r > 0 {
        targets.push((0..dim).map(|i| (i < r) as u8).collect());
        for i in 0..r {
            targets.push((0..dim).map(|j| (j == i) as u8).collect());
        }
    }
    targets.resize(spec.m, vec![0; dim]);
    targets
}

fn odd_primes_below(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n.max(2)];
    let mut primes = Vec::new();
    for i in 2..n {
        if !composite[i] {
            if i > 2 {
                primes.push(i as u64);
            }
            for j in (i * i..n).step_by(i) {
                composite[j] = true;
            }
        }
    }
    primes
}

/// For each target in turn, the smallest unused odd prime q ≤ budget, not dividing
/// any generator, whose Frobenius vector equals the target.
pub fn find_primes(targets: &[Vec<u8>], basis: &GoverningBasis, budget: u64) -> Result<Vec<u64>> {
    let candidates: Vec<u64> = odd_primes_below(budget.saturating_add(1))
        .into_iter()
        .filter(|&q| basis.gens().iter().all(|&g| g.unsigned_abs() % q != 0))
        .collect();
    let mut frob: Vec<Option<Vec<u8>>> = vec![None; candidates.len()];
    let mut used = vec![false; candidates.len()];
    let mut chosen = Vec::with_capacity(targets.len());
    for target in targets {
        let mut found = None;
        for (i, &q) in candidates.iter().enumerate() {
            if used[i] {
                continue;
            }
            if frob[i].is_none() {
                frob[i] = Some(frobenius_vector(q, basis)?);
            }
            if frob[i].as_ref() == Some(target) {
                found = Some(i);
                break;
            }
        }
        let i = found.ok_or_else(|| Error::BudgetExhausted { target: target.clone(), budget })?;
        used[i] = true;
        chosen.push(candidates[i]);
    }
    Ok(chosen)
}

/// Forms d = ∏ primes and checks every claimed property of the result.
pub fn assemble_and_verify(spec: &SearchSpec, primes: &[u64]) -> Result<SearchResult> {
    let fail = |reason: String, report: Option<GenusReport>| Error::VerificationFailed {
        reason,
        report: report.map(Box::new),
    };
    let d = primes
        .iter()
        .try_fold(1i64, |acc, &p| acc.checked_mul(p as i64))
        .ok_or(Error::Overflow("product of search primes"))?;
    if d.rem_euclid(4) != 1 {
        return Err(fail(format!("d = {d} is not 1 mod 4"), None));
    }
    if spec.places.s0().contains(&2) && d.rem_euclid(8) != 1 {
        return Err(fail(format!("d = {d} is not 1 mod 8 although 2 is in S"), None));
    }
    if let Some(&l) = spec.places.s0().iter().find(|&&l| kronecker(d, l as i64) != 1) {
        return Err(fail(format!("{l} does not split in Q(sqrt({d}))"), None));
    }
    let mut sigma = primes.to_vec();
    sigma.sort_unstable();
    if ramification_set(d)? != sigma {
        return Err(fail(format!("ramified primes of {d} differ from {sigma:?}"), None));
    }

    let inst = ProblemInstance::new(d, spec.places.clone())?;
    let report = genus_number(&inst)?;
    if report.log2_g as usize != spec.k {
        let reason = format!("g = {} but 2^{} was requested", report.g, spec.k);
        return Err(fail(reason, Some(report)));
    }
    let s_places = spec.places.s0().iter().map(|&l| l.to_string()).chain(["inf".to_string()]);
    for label in s_places {
        let split = report.splitting.iter().any(|s| s.place == label && s.kind == SplittingType::Split);
        if !split {
            return Err(fail(format!("{label} is not split"), Some(report)));
        }
    }
    Ok(SearchResult { max_prime: sigma.last().copied().unwrap_or(0), sigma, d, report })
}

pub fn search(spec: &SearchSpec) -> Result<SearchResult> {
    let basis = governing_basis(&spec.places);
    let targets = plan_targets(spec);
    let primes = find_primes(&targets, &basis, spec.prime_budget)?;
    assemble_and_verify(spec, &primes)
}
