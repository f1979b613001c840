//! Counting objects: `χ_r`, `S_{m,n}`, the incidence counts `|Γ|`/`|Γ*|`,
//! the linear-system audit and Jacobian ranks.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::family::{enumerate_b, family_poly, value_profile, FamilyError, FamilySpec};
use crate::gf::FieldElement;
use crate::linalg;
use crate::scan::{ordered_tuple_counts, scan, ScanOptions, ScanTotals};
use crate::upoly::{root_profile, RootProfile, UniPoly};

/// Default cap on enumerated subsets (or subset pairs) for oracle methods.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error("enumeration of {needed} cases exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("r = {r} is outside the uniqueness range r >= {lower}")]
    RegimeViolation { r: usize, lower: usize },
    #[error("subset size {r} is below the uniqueness threshold {lower}")]
    NotUniqueRegime { r: usize, lower: usize },
    #[error("the two subsets intersect")]
    OverlappingSubsets,
    #[error("node {0} is not a root")]
    NotOnVariety(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiMethod {
    Profile,
    Subsets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SmnMethod {
    Profile,
    Brute,
}

/// `r ↦ χ_r`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChiVector(pub BTreeMap<usize, BigUint>);

impl ChiVector {
    pub fn get(&self, r: usize) -> Option<&BigUint> {
        self.0.get(&r)
    }

    /// `χ_r = Σ_b Σ_c C(N_b(c), r)` for `d − s + 1 ≤ r ≤ d`.
    pub fn from_scan(spec: &FamilySpec, totals: &ScanTotals) -> Self {
        let d = spec.d();
        ChiVector((d - spec.s() + 1..=d).map(|r| (r, totals.binom[r].clone())).collect())
    }
}

/// `(m, n) ↦ S_{m,n}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SMatrix(pub BTreeMap<(usize, usize), BigUint>);

impl SMatrix {
    pub fn get(&self, m: usize, n: usize) -> Option<&BigUint> {
        self.0.get(&(m, n))
    }

    /// Every cell `1 ≤ m, n ≤ d`.
    pub fn from_scan(totals: &ScanTotals) -> Self {
        let d = totals.d;
        let mut cells = BTreeMap::new();
        for m in 1..=d {
            for n in 1..=d {
                cells.insert((m, n), totals.smn[m][n].clone());
            }
        }
        SMatrix(cells)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaCounts {
    /// Points with pairwise-distinct coordinates (and `b₀,₁ ≠ b₀,₂`).
    pub affine_open: BigUint,
    /// Points of the divided-difference closure.
    pub closed: BigUint,
}

fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn check_budget(needed: u128, budget: u128) -> Result<(), CountingError> {
    if needed > budget {
        return Err(CountingError::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// The unique `(b, b₀)` with `f_b + b₀` vanishing on `subset`, if any.
///
/// With `P = ∏(T − α)` and `R = f_a mod P`, a solution exists iff
/// `deg R ≤ d − s − 1`, and then `b`, `b₀` are the coefficients of `−R`.
pub fn interpolating_b0(
    spec: &FamilySpec,
    subset: &[FieldElement],
) -> Result<Option<(Vec<FieldElement>, FieldElement)>, CountingError> {
    let (d, s) = (spec.d(), spec.s());
    let r = subset.len();
    if r < d - s + 1 {
        return Err(CountingError::NotUniqueRegime { r, lower: d - s + 1 });
    }
    if subset.iter().duplicates().next().is_some() {
        return Err(CountingError::InvalidArgument("subset has repeated elements".into()));
    }
    let field = spec.field();
    let p = UniPoly::from_roots(field, subset);
    let (_, rem) = spec.fixed_part().div_rem(field, &p).expect("node product is nonzero");
    let len = spec.free_len();
    if rem.degree().is_some_and(|deg| deg > len) {
        return Ok(None);
    }
    let neg = |i: usize| field.neg(rem.coeff(i));
    let b: Vec<FieldElement> = (1..=len).rev().map(neg).collect();
    Ok(Some((b, neg(0))))
}

/// `χ_r` by the chosen method. Profile requires `r ≥ d − s + 1`; subsets
/// requires `C(q, r) ≤ budget`. Both return 0 for `r > d`.
pub fn chi_r(spec: &FamilySpec, r: usize, method: ChiMethod, budget: u128) -> Result<BigUint, CountingError> {
    let (d, s) = (spec.d(), spec.s());
    if r == 0 {
        return Err(CountingError::InvalidArgument("r must be positive".into()));
    }
    match method {
        ChiMethod::Profile => {
            if r < d - s + 1 {
                return Err(CountingError::RegimeViolation { r, lower: d - s + 1 });
            }
            if r > d {
                return Ok(BigUint::zero());
            }
            Ok(scan(spec, ScanOptions::default()).binom[r].clone())
        }
        ChiMethod::Subsets => {
            if r < d - s + 1 {
                return Err(CountingError::NotUniqueRegime { r, lower: d - s + 1 });
            }
            check_budget(binomial_u128(spec.q() as u128, r as u128), budget)?;
            let elems: Vec<FieldElement> = spec.field().elements().collect();
            let mut count = 0u64;
            for subset in elems.into_iter().combinations(r) {
                if interpolating_b0(spec, &subset)?.is_some() {
                    count += 1;
                }
            }
            Ok(BigUint::from(count))
        }
    }
}

/// `S_{m,n}` by the chosen method.
pub fn s_mn(spec: &FamilySpec, m: usize, n: usize, method: SmnMethod, budget: u128) -> Result<BigUint, CountingError> {
    let d = spec.d();
    if m == 0 || n == 0 {
        return Err(CountingError::InvalidArgument("m and n must be positive".into()));
    }
    if m > d || n > d {
        return Ok(BigUint::zero());
    }
    match method {
        SmnMethod::Profile => Ok(scan(spec, ScanOptions::default()).smn[m][n].clone()),
        SmnMethod::Brute => {
            let q = spec.q() as u128;
            let needed = q
                .saturating_pow((spec.free_len() + 2) as u32)
                .saturating_mul(binomial_u128(q, m as u128))
                .saturating_mul(binomial_u128(q, n as u128));
            check_budget(needed, budget)?;
            let field = spec.field();
            let elems: Vec<FieldElement> = field.elements().collect();
            let subsets_m: Vec<Vec<FieldElement>> = elems.iter().copied().combinations(m).collect();
            let subsets_n: Vec<Vec<FieldElement>> = elems.iter().copied().combinations(n).collect();
            let vanishes = |f: &UniPoly, set: &[FieldElement]| set.iter().all(|&t| f.eval(field, t).is_zero());
            let mut total = 0u64;
            for b in enumerate_b(spec) {
                for &b01 in &elems {
                    let f1 = family_poly(spec, &b, b01)?;
                    let hits_m: Vec<&Vec<FieldElement>> = subsets_m.iter().filter(|g| vanishes(&f1, g)).collect();
                    if hits_m.is_empty() {
                        continue;
                    }
                    for &b02 in &elems {
                        if b02 == b01 {
                            continue;
                        }
                        let f2 = family_poly(spec, &b, b02)?;
                        for _g1 in &hits_m {
                            for g2 in &subsets_n {
                                if vanishes(&f2, g2) {
                                    total += 1;
                                }
                            }
                        }
                    }
                }
            }
            Ok(BigUint::from(total))
        }
    }
}

/// Whether the multiset `alpha` fits inside the root multiplicities.
pub fn within_multiplicities(profile: &RootProfile, alpha: &[FieldElement]) -> bool {
    alpha.iter().counts().into_iter().all(|(a, k)| k as u32 <= profile.multiplicity(*a))
}

fn falling(n: usize, r: usize) -> BigUint {
    (0..r).map(|i| BigUint::from(n.saturating_sub(i))).product()
}

/// Per-`(b, c)` data for the reference incidence counts: distinct root
/// count and ordered tuple counts with multiplicity, both indexed by `r`.
fn per_value_tuples(spec: &FamilySpec, b: &[FieldElement]) -> Result<Vec<(usize, Vec<u128>)>, CountingError> {
    let field = spec.field();
    let d = spec.d();
    field
        .elements()
        .map(|c| {
            let f = family_poly(spec, b, field.neg(c))?;
            let prof = root_profile(field, &f).expect("family members are nonzero");
            let mults: Vec<u32> = prof.roots.values().copied().collect();
            Ok((prof.distinct_count(), ordered_tuple_counts(&mults, d)))
        })
        .collect()
}

/// `|Γ_r|` and `|Γ_r*|` from root profiles of every `f_b + b₀`.
pub fn gamma_counts_r(spec: &FamilySpec, r: usize) -> Result<GammaCounts, CountingError> {
    let d = spec.d();
    if r == 0 || r > d {
        return Err(CountingError::InvalidArgument(format!("r = {r} outside 1..={d}")));
    }
    let mut open = BigUint::zero();
    let mut closed = BigUint::zero();
    for b in enumerate_b(spec) {
        for (n, tuples) in per_value_tuples(spec, &b)? {
            open += falling(n, r);
            closed += BigUint::from(tuples[r]);
        }
    }
    Ok(GammaCounts { affine_open: open, closed })
}

/// `|Γ_{m,n}|` and `|Γ_{m,n}*|` from root profiles.
pub fn gamma_counts_mn(spec: &FamilySpec, m: usize, n: usize) -> Result<GammaCounts, CountingError> {
    let d = spec.d();
    if m == 0 || n == 0 || m > d || n > d {
        return Err(CountingError::InvalidArgument(format!("(m, n) = ({m}, {n}) outside 1..={d}")));
    }
    let mut open = BigUint::zero();
    let mut closed = BigUint::zero();
    for b in enumerate_b(spec) {
        let data = per_value_tuples(spec, &b)?;
        let (mut gm, mut gn) = (0u128, 0u128);
        let mut fm_total = BigUint::zero();
        let mut fn_total = BigUint::zero();
        let mut diag = BigUint::zero();
        for (cnt, tuples) in &data {
            gm += tuples[m];
            gn += tuples[n];
            let (x, y) = (falling(*cnt, m), falling(*cnt, n));
            diag += &x * &y;
            fm_total += x;
            fn_total += y;
        }
        open += fm_total * fn_total - diag;
        closed += BigUint::from(gm) * BigUint::from(gn);
    }
    Ok(GammaCounts { affine_open: open, closed })
}

/// `|Γ_r|`, `|Γ_r*|` from a scan run with multiplicities.
pub fn gamma_r_from_scan(totals: &ScanTotals, r: usize) -> Option<GammaCounts> {
    Some(GammaCounts {
        affine_open: factorial(r) * &totals.binom[r],
        closed: totals.gamma_star.as_ref()?[r].clone(),
    })
}

/// `|Γ_{m,n}|`, `|Γ_{m,n}*|` from a scan run with multiplicities.
pub fn gamma_mn_from_scan(totals: &ScanTotals, m: usize, n: usize) -> Option<GammaCounts> {
    Some(GammaCounts {
        affine_open: factorial(m) * factorial(n) * &totals.smn[m][n],
        closed: totals.gamma_star_mn.as_ref()?[m][n].clone(),
    })
}

/// Direct count of ordered tuples `α ∈ F_q^r` with `∏(T − α_i) | f_b + b₀`
/// over all `(b, b₀)`. Meant for `q ≤ 5`, `r ≤ 4`.
pub fn gamma_star_tuple_oracle(spec: &FamilySpec, r: usize) -> Result<BigUint, CountingError> {
    let field = spec.field();
    let needed = (spec.q() as u128).saturating_pow((spec.free_len() + 1 + r) as u32);
    check_budget(needed, DEFAULT_BUDGET)?;
    let elems: Vec<FieldElement> = field.elements().collect();
    let mut count = 0u64;
    for b in enumerate_b(spec) {
        for &b0 in &elems {
            let f = family_poly(spec, &b, b0)?;
            for alpha in std::iter::repeat(elems.iter().copied()).take(r).multi_cartesian_product() {
                if crate::upoly::divides(field, &f, &alpha) {
                    count += 1;
                }
            }
            if r == 0 {
                count += 1;
            }
        }
    }
    Ok(BigUint::from(count))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearAudit {
    pub rank: usize,
    /// Solutions `(b, b₀,₁, b₀,₂)` of the system.
    pub count_all: BigUint,
    /// Solutions with `b₀,₁ ≠ b₀,₂`.
    pub count_strict: BigUint,
}

/// Rows `(α^{d−s−1}, …, α, 1, 0)` for `α ∈ Γ₁` and `(β^{d−s−1}, …, β, 0, 1)`
/// for `β ∈ Γ₂`, right-hand side `−f_a(·)`.
pub fn linear_system(
    spec: &FamilySpec,
    g1: &[FieldElement],
    g2: &[FieldElement],
) -> (Vec<Vec<FieldElement>>, Vec<FieldElement>) {
    let field = spec.field();
    let len = spec.free_len();
    let fa = spec.fixed_part();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (set, slot) in [(g1, 0usize), (g2, 1usize)] {
        for &x in set {
            let mut row: Vec<FieldElement> = (1..=len).rev().map(|e| field.pow(x, e as u64)).collect();
            row.push(if slot == 0 { FieldElement::ONE } else { FieldElement::ZERO });
            row.push(if slot == 1 { FieldElement::ONE } else { FieldElement::ZERO });
            rows.push(row);
            rhs.push(field.neg(fa.eval(field, x)));
        }
    }
    (rows, rhs)
}

pub fn linear_system_audit(
    spec: &FamilySpec,
    g1: &[FieldElement],
    g2: &[FieldElement],
) -> Result<LinearAudit, CountingError> {
    if g1.iter().any(|x| g2.contains(x)) {
        return Err(CountingError::OverlappingSubsets);
    }
    let field = spec.field();
    let (rows, rhs) = linear_system(spec, g1, g2);
    let rank = linalg::rank(field, &rows);
    let count_all = linalg::solution_count(field, &rows, &rhs);
    let cols = spec.free_len() + 2;
    let mut diag_rows = rows.clone();
    let mut hyperplane = vec![FieldElement::ZERO; cols];
    hyperplane[cols - 2] = FieldElement::ONE;
    hyperplane[cols - 1] = field.neg(FieldElement::ONE);
    diag_rows.push(hyperplane);
    let mut diag_rhs = rhs.clone();
    diag_rhs.push(FieldElement::ZERO);
    let on_diagonal = linalg::solution_count(field, &diag_rows, &diag_rhs);
    Ok(LinearAudit { rank, count_all: count_all.clone(), count_strict: count_all - on_diagonal })
}

/// Exhaustive `(count_all, count_strict)` over `F_q^{d−s+1}`.
pub fn linear_system_brute(
    spec: &FamilySpec,
    g1: &[FieldElement],
    g2: &[FieldElement],
    budget: u128,
) -> Result<(BigUint, BigUint), CountingError> {
    let field = spec.field();
    check_budget((spec.q() as u128).saturating_pow((spec.free_len() + 2) as u32), budget)?;
    let elems: Vec<FieldElement> = field.elements().collect();
    let (mut all, mut strict) = (0u64, 0u64);
    for b in enumerate_b(spec) {
        let base = family_poly(spec, &b, FieldElement::ZERO)?;
        let ok1: Vec<bool> = elems
            .iter()
            .map(|&b0| g1.iter().all(|&x| field.add(base.eval(field, x), b0).is_zero()))
            .collect();
        let ok2: Vec<bool> = elems
            .iter()
            .map(|&b0| g2.iter().all(|&x| field.add(base.eval(field, x), b0).is_zero()))
            .collect();
        for (i, _) in ok1.iter().enumerate().filter(|(_, &ok)| ok) {
            for (j, _) in ok2.iter().enumerate().filter(|(_, &ok)| ok) {
                all += 1;
                if i != j {
                    strict += 1;
                }
            }
        }
    }
    Ok((BigUint::from(all), BigUint::from(strict)))
}

/// Rank of the `r × (d − s + r)` Jacobian at `(b, b₀, α)`; row `i` is
/// `(α_i^{d−s−1}, …, α_i, 1)` followed by `f′(α_i)` in column `d − s + i`.
/// `b0_full = (b_{d−s−1}, …, b_1, b₀)`.
pub fn jacobian_rank(spec: &FamilySpec, b0_full: &[FieldElement], alpha: &[FieldElement]) -> Result<usize, CountingError> {
    let field = spec.field();
    let len = spec.free_len();
    if b0_full.len() != len + 1 {
        return Err(FamilyError::LengthMismatch { expected: len + 1, got: b0_full.len() }.into());
    }
    let f = family_poly(spec, &b0_full[..len], b0_full[len])?;
    if let Some(i) = alpha.iter().position(|&x| !f.eval(field, x).is_zero()) {
        return Err(CountingError::NotOnVariety(i));
    }
    let fp = f.derivative(field);
    let r = alpha.len();
    let cols = len + 1 + r;
    let rows: Vec<Vec<FieldElement>> = alpha
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row = vec![FieldElement::ZERO; cols];
            for e in 0..=len {
                row[len - e] = field.pow(x, e as u64);
            }
            row[len + 1 + i] = fp.eval(field, x);
            row
        })
        .collect();
    Ok(linalg::rank(field, &rows))
}

/// `Σ_b V(f_b)` computed from individual value profiles (no scan).
pub fn value_set_sum_by_profiles(spec: &FamilySpec) -> BigUint {
    enumerate_b(spec)
        .map(|b| BigUint::from(value_profile(spec, &b).expect("length matches").value_set_size()))
        .fold(BigUint::zero(), |a, x| a + x)
}

/// `r!` as an arbitrary-precision integer.
pub fn factorial_big(n: usize) -> BigUint {
    if n == 0 {
        BigUint::one()
    } else {
        factorial(n)
    }
}
