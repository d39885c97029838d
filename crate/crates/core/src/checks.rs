//! Seeded instance generators and the invariant suites run by `genus selftest`
//! and by the acceptance tests.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{factor_squarefree, factorize, hilbert_add, is_prime, Place};
use crate::genus::{build_matrix_caserule, genus_number, ramification_set, ProblemInstance};
use crate::governing::{frobenius_vector, gamma_dim_quotient, governing_basis, wt_subgroup, PlaceSets, QuotientDim};
use crate::linalg::{kernel_dim_fp, MatrixFp};
use crate::oracle::{bqf_class_data, build_matrix_hilbert, field_discriminant, genus_via_formula, hilbert_bruteforce};
use crate::search::{search, SearchSpec};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Symbol arguments of the reference grid.
pub const SYMBOL_GRID: [i64; 16] = [1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7, 10, -10, 15, -15];

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub elapsed_ms: u128,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {} ({} cases, {} ms)", self.name, self.cases, self.elapsed_ms);
        if let Some(first) = self.failures.first() {
            line.push_str(&format!(": {} failure(s), first: {first}", self.failures.len()));
        }
        line
    }
}

fn run_suite<F>(name: &'static str, body: F) -> SuiteReport
where
    F: FnOnce() -> (usize, Vec<String>),
{
    let start = Instant::now();
    let (cases, failures) = body();
    SuiteReport { name, cases, failures, elapsed_ms: start.elapsed().as_millis() }
}

fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|&p| is_prime(p)).collect()
}

fn random_places(rng: &mut ChaCha8Rng, pool: &[u64]) -> PlaceSets {
    let n_s0 = rng.gen_range(0..=3);
    let s0: Vec<u64> = pool.choose_multiple(rng, n_s0).copied().collect();
    let odd: Vec<u64> = pool.iter().copied().filter(|p| *p != 2 && !s0.contains(p)).collect();
    let n_t = rng.gen_range(0..=2);
    let t: Vec<u64> = odd.choose_multiple(rng, n_t).copied().collect();
    PlaceSets::new(s0, rng.gen_bool(0.5), t).expect("disjoint primes by construction")
}

/// Valid instances with |d| ≤ 10⁵ squarefree, #S0 ≤ 3 primes below 100, #T ≤ 2 odd primes
/// below 100, and Σ disjoint from S0 ∪ T.
pub fn random_instances(seed: u64, count: usize) -> Vec<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = primes_below(100);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let places = random_places(&mut rng, &pool);
        for _ in 0..64 {
            let d: i64 = rng.gen_range(-100_000..=100_000);
            if d == 0 || d == 1 || factor_squarefree(d).is_err() {
                continue;
            }
            if let Ok(inst) = ProblemInstance::new(d, places.clone()) {
                out.push(inst);
                break;
            }
        }
    }
    out
}

fn describe(inst: &ProblemInstance) -> String {
    let p = inst.places();
    format!("d={} S0={:?} sInf={} T={:?}", inst.d(), p.s0(), p.s_inf(), p.t())
}

fn collect_failures<T: Sync, F>(items: &[T], check: F) -> (usize, Vec<String>)
where
    F: Fn(&T) -> std::result::Result<(), String> + Sync,
{
    let failures: Vec<String> = items.par_iter().filter_map(|x| check(x).err()).collect();
    (items.len(), failures)
}

/// g from the symbol matrix equals g from the local norm index formula.
pub fn suite_genus_equivalence(instances: &[ProblemInstance]) -> SuiteReport {
    run_suite("genus matrix vs genus formula", || {
        collect_failures(instances, |inst| {
            let lhs = genus_number(inst).map_err(|e| format!("{}: {e}", describe(inst)))?;
            let rhs = genus_via_formula(inst).map_err(|e| format!("{}: {e}", describe(inst)))?;
            if lhs.g == rhs {
                Ok(())
            } else {
                Err(format!("{}: matrix g={} formula g={rhs}", describe(inst), lhs.g))
            }
        })
    })
}

/// Case-rule entries equal Hilbert symbols computed by conic search.
pub fn suite_matrix_equivalence(instances: &[ProblemInstance]) -> SuiteReport {
    run_suite("case-rule matrix vs Hilbert-symbol matrix", || {
        collect_failures(instances, |inst| {
            let err = |e: crate::error::Error| format!("{}: {e}", describe(inst));
            let a = build_matrix_caserule(inst).map_err(err)?;
            let b = build_matrix_hilbert(inst).map_err(err)?;
            if a == b {
                return Ok(());
            }
            let pos = (0..a.nrows())
                .flat_map(|r| (0..a.ncols()).map(move |c| (r, c)))
                .find(|&(r, c)| a.get(r, c) != b.get(r, c));
            Err(match pos {
                Some((r, c)) => format!(
                    "{}: entry ({}, {}) case rule {} vs symbol {}",
                    describe(inst),
                    a.row_labels()[r],
                    a.col_labels()[c],
                    a.get(r, c),
                    b.get(r, c)
                ),
                None => format!("{}: shapes or labels differ", describe(inst)),
            })
        })
    })
}

/// ncols − dim W_T ≤ log₂ g ≤ ncols.
pub fn suite_genus_bounds(instances: &[ProblemInstance]) -> SuiteReport {
    run_suite("genus number bounds", || {
        collect_failures(instances, |inst| {
            let r = genus_number(inst).map_err(|e| format!("{}: {e}", describe(inst)))?;
            let n = r.matrix.ncols();
            let lg = r.log2_g as usize;
            if n - r.wt_dim.min(n) <= lg && lg <= n {
                Ok(())
            } else {
                Err(format!("{}: ncols={n} dim W={} log2 g={lg}", describe(inst), r.wt_dim))
            }
        })
    })
}

/// Imaginary fields with S = T = ∅: g = 2^#Σ and the ambiguous forms number g/2.
pub fn suite_gauss(max_disc: i64) -> SuiteReport {
    run_suite("ambiguous classes of imaginary fields", || {
        let ds: Vec<i64> = (1..=max_disc)
            .map(|n| -n)
            .filter(|&d| factor_squarefree(d).is_ok() && field_discriminant(d).abs() <= max_disc)
            .collect();
        let empty = PlaceSets::new(vec![], false, vec![]).expect("empty sets");
        collect_failures(&ds, |&d| {
            let inst = ProblemInstance::new(d, empty.clone()).map_err(|e| format!("d={d}: {e}"))?;
            let r = genus_number(&inst).map_err(|e| format!("d={d}: {e}"))?;
            let sigma = ramification_set(d).map_err(|e| format!("d={d}: {e}"))?;
            let (_, ambiguous) = bqf_class_data(field_discriminant(d)).map_err(|e| format!("d={d}: {e}"))?;
            if r.g != 1 << sigma.len() {
                return Err(format!("d={d}: g={} but #Σ={}", r.g, sigma.len()));
            }
            if 2 * ambiguous != r.g {
                return Err(format!("d={d}: g={} but {ambiguous} ambiguous forms", r.g));
            }
            Ok(())
        })
    })
}

/// S = {∞}, T = {5}: −1 ≢ 1 mod 5 so W_T = 0 and Θ has no rows, while the Frobenius of 5
/// is trivial and the quotient shortcut does not apply.
pub fn suite_trivial_wt_fixture() -> SuiteReport {
    run_suite("S = {inf}, T = {5} fixture", || {
        let mut failures = Vec::new();
        let places = PlaceSets::new(vec![], true, vec![5]).expect("valid sets");
        let basis = governing_basis(&places);
        match wt_subgroup(&basis, places.t()) {
            Ok(w) if w.dim() == 0 => {}
            other => failures.push(format!("exact subgroup: {other:?}")),
        }
        match gamma_dim_quotient(&basis, places.t()) {
            Ok(QuotientDim::IndependenceFailure) => {}
            other => failures.push(format!("quotient path: {other:?}")),
        }
        let ds = [-1i64, 2, 3, -3, 7, -7, 13, 21, -21, 33, -39, 77, 97, -101];
        for &d in &ds {
            let inst = ProblemInstance::new(d, places.clone()).expect("Σ avoids 5");
            match genus_number(&inst) {
                Ok(r) if r.matrix.nrows() == 0 && r.g == 1 << r.matrix.ncols() => {}
                Ok(r) => failures.push(format!("d={d}: {} rows, g={}", r.matrix.nrows(), r.g)),
                Err(e) => failures.push(format!("d={d}: {e}")),
            }
        }
        (ds.len() + 2, failures)
    })
}

fn grid_places() -> Vec<Place> {
    let mut places = vec![Place::Infinity, Place::Two];
    places.extend(primes_below(51).into_iter().skip(1).map(|q| Place::prime(q).expect("odd prime")));
    places
}

/// Closed symbol formulas against conic search, and the product formula, on the grid.
pub fn suite_hilbert_grid() -> SuiteReport {
    run_suite("Hilbert symbol grid and product formula", || {
        let places = grid_places();
        let pairs: Vec<(i64, i64)> =
            SYMBOL_GRID.iter().flat_map(|&a| SYMBOL_GRID.iter().map(move |&b| (a, b))).collect();
        let (n, mut failures) = collect_failures(&pairs, |&(a, b)| {
            for &v in &places {
                let f = hilbert_add(a, b, v).map_err(|e| e.to_string())?;
                let o = hilbert_bruteforce(a, b, v).map_err(|e| e.to_string())?;
                if f != o {
                    return Err(format!("({a}, {b}) at {v}: formula {f} search {o}"));
                }
            }
            Ok(())
        });
        let (_, product) = suite_product_formula_pairs(&pairs);
        failures.extend(product);
        (n * places.len() + n, failures)
    })
}

fn suite_product_formula_pairs(pairs: &[(i64, i64)]) -> (usize, Vec<String>) {
    collect_failures(pairs, |&(a, b)| {
        let primes = factorize((a * b).unsigned_abs()).into_iter().map(|(p, _)| p);
        let mut places = vec![Place::Infinity, Place::Two];
        places.extend(primes.filter(|&p| p != 2).map(|p| Place::prime(p).expect("prime")));
        let mut total = 0u8;
        for v in places {
            total ^= hilbert_add(a, b, v).map_err(|e| e.to_string())?.bit();
        }
        if total == 0 {
            Ok(())
        } else {
            Err(format!("product formula fails for ({a}, {b})"))
        }
    })
}

/// The product formula alone, used to show that a corrupted symbol table is detected.
pub fn suite_product_formula() -> SuiteReport {
    run_suite("Hilbert product formula", || {
        let pairs: Vec<(i64, i64)> =
            SYMBOL_GRID.iter().flat_map(|&a| SYMBOL_GRID.iter().map(move |&b| (a, b))).collect();
        suite_product_formula_pairs(&pairs)
    })
}

/// Dropping ∞ from S keeps exactly the classes with a positive witness.
pub fn suite_real_place_quotient(seed: u64, count: usize) -> SuiteReport {
    run_suite("real place quotient", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = primes_below(100);
        let sets: Vec<PlaceSets> = (0..count).map(|_| random_places(&mut rng, &pool).with_s_inf(true)).collect();
        collect_failures(&sets, |places| {
            let tag = format!("S0={:?} T={:?}", places.s0(), places.t());
            let with = wt_subgroup(&governing_basis(places), places.t()).map_err(|e| format!("{tag}: {e}"))?;
            let without_places = places.with_s_inf(false);
            let without =
                wt_subgroup(&governing_basis(&without_places), places.t()).map_err(|e| format!("{tag}: {e}"))?;
            // Enumerate W_T for sInf = true; the sign coordinate comes first.
            let mut positive = Vec::new();
            for mask in 0u32..(1 << with.dim()) {
                let mut v = vec![0u8; with.ambient_dim()];
                for (i, b) in with.basis().iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        v.iter_mut().zip(b).for_each(|(x, y)| *x ^= y);
                    }
                }
                if v[0] == 0 {
                    positive.push(v[1..].to_vec());
                }
            }
            if positive.len() != 1 << without.dim() {
                return Err(format!("{tag}: {} positive classes vs dim {}", positive.len(), without.dim()));
            }
            if let Some(v) = positive.iter().find(|v| !without.contains(v)) {
                return Err(format!("{tag}: positive class {v:?} missing without inf"));
            }
            let drop = with.dim() as isize - without.dim() as isize;
            if !(0..=1).contains(&drop) {
                return Err(format!("{tag}: dimension drop {drop}"));
            }
            if without.witnesses().iter().any(|w| w.is_negative()) {
                return Err(format!("{tag}: negative witness without inf"));
            }
            Ok(())
        })
    })
}

/// Search over S0 ⊆ {3, 5, 7} with #S0 ≤ 2 and 1 ≤ m ≤ 5 for every admissible k.
pub fn suite_search_coverage(budget: u64) -> SuiteReport {
    run_suite("prescribed genus construction", || {
        let subsets: Vec<Vec<u64>> = vec![vec![], vec![3], vec![5], vec![7], vec![3, 5], vec![3, 7], vec![5, 7]];
        let mut specs = Vec::new();
        for s0 in &subsets {
            for m in 1..=5usize {
                for k in 0..=m {
                    let places = PlaceSets::new(s0.clone(), true, vec![]).expect("valid sets");
                    if let Ok(spec) = SearchSpec::new(places, m, k, budget) {
                        specs.push(spec);
                    }
                }
            }
        }
        let (n, mut failures) = collect_failures(&specs, |spec| {
            let tag = format!("S0={:?} m={} k={}", spec.places().s0(), spec.m(), spec.k());
            let r = search(spec).map_err(|e| format!("{tag}: {e}"))?;
            let basis = governing_basis(spec.places());
            let mut sum = vec![0u8; basis.dim()];
            for &p in &r.sigma {
                let f = frobenius_vector(p, &basis).map_err(|e| format!("{tag}: {e}"))?;
                sum.iter_mut().zip(f).for_each(|(s, x)| *s ^= x);
            }
            if sum.iter().any(|&x| x != 0) {
                return Err(format!("{tag}: Frobenius vectors of {:?} do not sum to zero", r.sigma));
            }
            if r.report.g != 1 << spec.k() || r.sigma.len() != spec.m() {
                return Err(format!("{tag}: got g={} with Σ={:?}", r.report.g, r.sigma));
            }
            Ok(())
        });
        let canonical = [(1usize, 21i64, vec![3u64, 7]), (2, 65, vec![5, 13])];
        for (k, d, sigma) in canonical {
            let spec = SearchSpec::new(PlaceSets::new(vec![], true, vec![]).expect("valid"), 2, k, budget)
                .expect("valid spec");
            match search(&spec) {
                Ok(r) if r.d == d && r.sigma == sigma => {}
                Ok(r) => failures.push(format!("m=2 k={k}: got d={} Σ={:?}", r.d, r.sigma)),
                Err(e) => failures.push(format!("m=2 k={k}: {e}")),
            }
        }
        (n + 2, failures)
    })
}

/// Random matrices over F₂ and F₃ of size at most 4×4: kernel size by enumeration.
pub fn suite_kernel_enumeration(seed: u64, count: usize) -> SuiteReport {
    run_suite("kernel dimension vs enumeration", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<MatrixFp> = (0..count)
            .map(|_| {
                let p: u8 = if rng.gen_bool(0.5) { 2 } else { 3 };
                let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                let rows: Vec<Vec<u8>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(0..p)).collect()).collect();
                MatrixFp::from_rows(p, c, &rows).expect("reduced entries")
            })
            .collect();
        collect_failures(&mats, |m| {
            let p = m.p() as u32;
            let n = m.ncols() as u32;
            let zeros = (0..p.pow(n))
                .filter(|&code| {
                    let x: Vec<u8> = (0..n).map(|i| (code / p.pow(i) % p) as u8).collect();
                    m.apply(&x).iter().all(|&y| y == 0)
                })
                .count();
            let expected = p.pow(kernel_dim_fp(m) as u32) as usize;
            if zeros == expected {
                Ok(())
            } else {
                Err(format!("{m:?}: {zeros} kernel vectors, dimension says {expected}"))
            }
        })
    })
}

/// Every suite at its acceptance size.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    let instances = random_instances(seed, 500);
    vec![
        suite_hilbert_grid(),
        suite_product_formula(),
        suite_kernel_enumeration(seed, 1000),
        suite_trivial_wt_fixture(),
        suite_real_place_quotient(seed, 100),
        suite_genus_equivalence(&instances),
        suite_matrix_equivalence(&instances),
        suite_genus_bounds(&instances),
        suite_gauss(10_000),
        suite_search_coverage(100_000),
    ]
}
