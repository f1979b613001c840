//! Symbolic checks of the closed forms for discriminants and first
//! subresultants of `F = T^d + Σ_{i ∈ free} B_i T^i`.
//!
//! Discriminants are compared up to a nonzero scalar of `F_p`, subresultant
//! terms up to sign. The scalar found is always reported.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::mpoly::{symbolic_resultant, symbolic_subres1, weight_decompose, MpolyError, MultiPoly, WeightSystem};

/// Largest degree accepted for symbolic work.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AppendixError {
    #[error("derivative vanishes identically")]
    DegenerateCase,
    #[error("(p, d) = ({p}, {d}) selects case {actual}, not {expected}")]
    CaseMismatch { p: u32, d: usize, expected: CaseTag, actual: CaseTag },
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Mpoly(#[from] MpolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    /// `p ∤ d(d−1)`.
    #[serde(rename = "p∤d(d-1)")]
    Generic,
    #[serde(rename = "p|d")]
    PDividesD,
    #[serde(rename = "p|(d-1)-even")]
    PDividesDm1Even,
    #[serde(rename = "p|(d-1)-odd")]
    PDividesDm1Odd,
}

impl CaseTag {
    pub fn of(p: u32, d: usize) -> CaseTag {
        let p = p as usize;
        if d % p == 0 {
            CaseTag::PDividesD
        } else if (d - 1) % p == 0 {
            if d % 2 == 0 {
                CaseTag::PDividesDm1Even
            } else {
                CaseTag::PDividesDm1Odd
            }
        } else {
            CaseTag::Generic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Generic => "p∤d(d-1)",
            CaseTag::PDividesD => "p|d",
            CaseTag::PDividesDm1Even => "p|(d-1)-even",
            CaseTag::PDividesDm1Odd => "p|(d-1)-odd",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Match {
    Exact,
    UpToScalar,
    UpToSign,
    Failed,
}

impl Match {
    pub fn passed(self) -> bool {
        self != Match::Failed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppendixReport {
    pub p: u32,
    pub d: usize,
    pub case: CaseTag,
    pub computed: MultiPoly,
    pub target: MultiPoly,
    pub matched: Match,
    pub scalar: Option<u32>,
    /// `deg_{B₀}` of the full symbolic resultant used.
    pub deg_b0: Option<u32>,
    /// A weight-consistent alternative target, compared for information only.
    pub diagnostic: Option<(MultiPoly, Match)>,
}

impl AppendixReport {
    pub fn to_serializable(&self) -> AppendixReportOut {
        AppendixReportOut {
            p: self.p,
            d: self.d,
            case: self.case.name().to_string(),
            computed: self.computed.to_text(),
            target: self.target.to_text(),
            matched: self.matched,
            scalar: self.scalar,
            deg_b0: self.deg_b0,
            diagnostic_target: self.diagnostic.as_ref().map(|(t, _)| t.to_text()),
            diagnostic_matched: self.diagnostic.as_ref().map(|(_, m)| *m),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReportOut {
    pub p: u32,
    pub d: usize,
    pub case: String,
    pub computed: String,
    pub target: String,
    pub matched: Match,
    pub scalar: Option<u32>,
    pub deg_b0: Option<u32>,
    pub diagnostic_target: Option<String>,
    pub diagnostic_matched: Option<Match>,
}

fn check_params(p: u32, d: usize) -> Result<(), AppendixError> {
    let odd_prime = p > 2 && (2..p).take_while(|i| i * i <= p).all(|i| p % i != 0);
    if !odd_prime {
        return Err(AppendixError::Unsupported(format!("p = {p} is not an odd prime")));
    }
    if !(2..=MAX_DEGREE).contains(&d) {
        return Err(AppendixError::Unsupported(format!("d = {d} outside 2..={MAX_DEGREE}")));
    }
    Ok(())
}

/// `F` and `∂F/∂T` as low-to-high `MultiPoly` coefficient lists in the
/// variables `B_i`, `i ∈ free` (sorted), with `∂F/∂T` at formal degree `d − 1`.
fn generic_pair(p: u32, d: usize, free: &[usize]) -> Result<(Vec<MultiPoly>, Vec<MultiPoly>), AppendixError> {
    let mut free = free.to_vec();
    free.sort_unstable();
    free.dedup();
    if free.iter().any(|&i| i >= d) {
        return Err(AppendixError::Unsupported("free index must be below d".into()));
    }
    let vars = MultiPoly::b_vars(&free);
    let zero = MultiPoly::zero(p, vars.clone());
    let mut f = vec![zero.clone(); d + 1];
    f[d] = MultiPoly::constant(p, vars.clone(), 1);
    for (slot, &i) in free.iter().enumerate() {
        f[i] = MultiPoly::var(p, vars.clone(), slot);
    }
    let g: Vec<MultiPoly> = (1..=d).map(|i| f[i].scale(i as i64)).collect();
    if g.iter().all(MultiPoly::is_zero) {
        return Err(AppendixError::DegenerateCase);
    }
    Ok((f, g))
}

/// `(−1)^{d(d−1)/2} Res_T(F, ∂F/∂T)` as a polynomial in the free `B_i`.
pub fn generic_disc(p: u32, d: usize, free: &[usize]) -> Result<MultiPoly, AppendixError> {
    check_params(p, d)?;
    if !free.contains(&0) {
        return Err(AppendixError::Unsupported("B0 must be free".into()));
    }
    let (f, g) = generic_pair(p, d, free)?;
    let res = symbolic_resultant(&f, &g)?;
    Ok(if (d * (d - 1) / 2) % 2 == 1 { res.neg() } else { res })
}

fn mod_coef(p: u32, x: i128) -> i64 {
    x.rem_euclid(p as i128) as i64
}

fn ipow(b: i128, e: usize) -> i128 {
    (0..e).fold(1i128, |acc, _| acc * b)
}

/// Reduces `x (mod p)` exactly for large powers.
fn pow_mod(p: u32, base: i64, e: usize) -> i64 {
    let p = p as i128;
    let mut acc = 1i128;
    let b = (base as i128).rem_euclid(p);
    for _ in 0..e {
        acc = acc * b % p;
    }
    acc as i64
}

fn compare(computed: &MultiPoly, target: &MultiPoly) -> (Match, Option<u32>) {
    match computed.scalar_ratio(target) {
        Some(1) => (Match::Exact, Some(1)),
        Some(l) => (Match::UpToScalar, Some(l)),
        None => (Match::Failed, None),
    }
}

/// The quoted closed form for the case selected by `(p, d)`, in the
/// variables of the corresponding free set.
pub fn case_target(p: u32, d: usize) -> (CaseTag, MultiPoly) {
    let case = CaseTag::of(p, d);
    let sgn = |e: usize| if e % 2 == 0 { 1i64 } else { -1 };
    match case {
        CaseTag::Generic => {
            let vars = MultiPoly::b_vars(&[0, 1]);
            let mut e0 = vec![0u32; 2];
            e0[0] = (d - 1) as u32;
            let t0 = MultiPoly::term(p, vars.clone(), pow_mod(p, d as i64, d), &e0);
            let c1 = sgn(d - 1) * pow_mod(p, d as i64 - 1, d - 1);
            let t1 = MultiPoly::term(p, vars, c1, &[0, d as u32]);
            (case, t0.add(&t1))
        }
        CaseTag::PDividesD => {
            let vars = MultiPoly::b_vars(&[0, 1, 2]);
            let du = d as u32;
            let t = |c: i128, e: [u32; 3]| MultiPoly::term(p, vars.clone(), mod_coef(p, c), &e);
            let f = t(1, [0, du, 0])
                .add(&t(sgn(d + 1) as i128 * ipow(2, d - 2), [0, 2, du - 1]))
                .add(&t(sgn(d) as i128 * ipow(2, d), [1, 0, du]));
            (case, f)
        }
        CaseTag::PDividesDm1Even => {
            let vars = MultiPoly::b_vars(&[0, 1, 2]);
            let du = d as u32;
            let t = |c: i128, e: [u32; 3]| MultiPoly::term(p, vars.clone(), mod_coef(p, c), &e);
            let f = t(4, [1, 0, du])
                .add(&t(1, [du - 1, 0, 0]))
                .add(&t(4, [du / 2, 0, du / 2]))
                .add(&t(-1, [0, 2, du - 1]));
            (case, f)
        }
        CaseTag::PDividesDm1Odd => {
            let vars = MultiPoly::b_vars(&[0, 1, 2]);
            let du = d as u32;
            let h = (du - 1) / 2;
            let t = |c: i128, e: [u32; 3]| MultiPoly::term(p, vars.clone(), mod_coef(p, c), &e);
            let f = t(-4, [1, 0, du])
                .add(&t(1, [du - 1, 0, 0]))
                .add(&t(2, [h, 0, h]))
                .add(&t(-1, [0, 2, du - 1]));
            (case, f)
        }
    }
}

/// Weight-consistent variant of the odd `p | (d−1)` form:
/// `−4B₂^dB₀ + B₀^{d−1} + 2B₀^{(d−1)/2}B₁B₂^{(d−1)/2} + B₁²B₂^{d−1}`.
pub fn odd_case_alternative(p: u32, d: usize) -> MultiPoly {
    let vars = MultiPoly::b_vars(&[0, 1, 2]);
    let du = d as u32;
    let h = (du - 1) / 2;
    let t = |c: i64, e: [u32; 3]| MultiPoly::term(p, vars.clone(), c, &e);
    t(-4, [1, 0, du])
        .add(&t(1, [du - 1, 0, 0]))
        .add(&t(2, [h, 1, h]))
        .add(&t(1, [0, 2, du - 1]))
}

fn highest_component(f: &MultiPoly, w: &WeightSystem) -> MultiPoly {
    weight_decompose(f, w)
        .into_iter()
        .next_back()
        .map(|(_, c)| c)
        .unwrap_or_else(|| f.clone())
}

/// Computes the discriminant for the case selected by `(p, d)` and compares
/// it with the quoted closed form.
pub fn appendix_case_check(p: u32, d: usize) -> Result<AppendixReport, AppendixError> {
    check_params(p, d)?;
    if d < 3 {
        return Err(AppendixError::Unsupported("d must be at least 3".into()));
    }
    let (case, target) = case_target(p, d);
    let (computed, deg_b0) = match case {
        CaseTag::Generic => {
            let disc = generic_disc(p, d, &[0, 1])?;
            let w2 = WeightSystem::new(vec![d as u32, d as u32 - 1]);
            (highest_component(&disc, &w2), disc.degree_in(0))
        }
        _ => {
            let disc = generic_disc(p, d, &[0, 1, 2])?;
            let deg = disc.degree_in(0);
            (disc, deg)
        }
    };
    let (matched, scalar) = compare(&computed, &target);
    let diagnostic = (case == CaseTag::PDividesDm1Odd).then(|| {
        let alt = odd_case_alternative(p, d);
        let m = compare(&computed, &alt).0;
        (alt, m)
    });
    Ok(AppendixReport { p, d, case, computed, target, matched, scalar, deg_b0, diagnostic })
}

/// As [`appendix_case_check`], insisting on a particular case.
pub fn appendix_case_check_expect(p: u32, d: usize, expected: CaseTag) -> Result<AppendixReport, AppendixError> {
    let actual = CaseTag::of(p, d);
    if actual != expected {
        return Err(AppendixError::CaseMismatch { p, d, expected, actual });
    }
    appendix_case_check(p, d)
}

/// `S₁ = Subres₁(F, ∂F/∂T)` for `F = T^d + B₂T² + B₁T + B₀`.
pub fn generic_subres1(p: u32, d: usize) -> Result<MultiPoly, AppendixError> {
    check_params(p, d)?;
    let free: Vec<usize> = (0..3.min(d)).collect();
    let (f, g) = generic_pair(p, d, &free)?;
    Ok(symbolic_subres1(&f, &g)?)
}

/// Checks the quoted monomial of `S₁`: `d(d−1)^{d−2}B₁^{d−2}` when
/// `p ∤ d(d−1)`, otherwise `2(−1)^d(d−2)^{d−2}B₂^{d−1}`, up to sign.
/// `computed` is `S₁`; `target` the quoted single term.
pub fn subres1_terms_check(p: u32, d: usize) -> Result<AppendixReport, AppendixError> {
    check_params(p, d)?;
    if d < 3 {
        return Err(AppendixError::Unsupported("d must be at least 3".into()));
    }
    let s1 = generic_subres1(p, d)?;
    let vars: Arc<[String]> = s1.vars().clone();
    let case = CaseTag::of(p, d);
    let (coef, exps) = if case == CaseTag::Generic {
        let c = d as i64 * pow_mod(p, d as i64 - 1, d - 2);
        (c, [0, d as u32 - 2, 0])
    } else {
        let sgn = if d % 2 == 0 { 1 } else { -1 };
        (2 * sgn * pow_mod(p, d as i64 - 2, d - 2), [0, 0, d as u32 - 1])
    };
    let target = MultiPoly::term(p, vars.clone(), coef, &exps);
    let expected = target.coeff(&exps);
    let got = s1.coeff(&exps);
    let matched = if s1.is_zero() || expected == 0 {
        Match::Failed
    } else if got == expected {
        Match::Exact
    } else if got == (p - expected) % p {
        Match::UpToSign
    } else {
        Match::Failed
    };
    let scalar = (matched.passed()).then_some(got);
    let (f, g) = generic_pair(p, d, &[0, 1, 2])?;
    let deg_b0 = symbolic_resultant(&f, &g)?.degree_in(0);
    Ok(AppendixReport { p, d, case, computed: s1, target, matched, scalar, deg_b0, diagnostic: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_disc() {
        let disc = generic_disc(5, 2, &[0, 1]).unwrap();
        let vars = MultiPoly::b_vars(&[0, 1]);
        let target = MultiPoly::term(5, vars.clone(), 1, &[0, 2]).add(&MultiPoly::term(5, vars, -4, &[1, 0]));
        assert_eq!(disc.scalar_ratio(&target), Some(1));
    }

    #[test]
    fn degree_in_b0() {
        for (p, d) in [(7, 3), (7, 4), (11, 5)] {
            assert_eq!(generic_disc(p, d, &[0, 1]).unwrap().degree_in(0), Some(d as u32 - 1));
        }
    }

    #[test]
    fn delta2_case() {
        let r = appendix_case_check(7, 4).unwrap();
        assert_eq!(r.case, CaseTag::Generic);
        assert!(r.matched.passed(), "{}", r.computed);
    }

    #[test]
    fn case_selection() {
        assert_eq!(CaseTag::of(3, 4), CaseTag::PDividesDm1Even);
        assert_eq!(CaseTag::of(5, 5), CaseTag::PDividesD);
        assert_eq!(CaseTag::of(3, 7), CaseTag::PDividesDm1Odd);
        assert!(matches!(
            appendix_case_check_expect(7, 4, CaseTag::PDividesD),
            Err(AppendixError::CaseMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_derivative() {
        // d = p = 3 with only B0 free: F' = 3T^2 = 0
        assert_eq!(generic_disc(3, 3, &[0]), Err(AppendixError::DegenerateCase));
    }

    #[test]
    fn subres_term_small() {
        let r = subres1_terms_check(5, 3).unwrap();
        assert!(r.matched.passed());
        assert!(!r.computed.is_zero());
        let r = subres1_terms_check(3, 3).unwrap();
        assert!(r.matched.passed());
    }
}
