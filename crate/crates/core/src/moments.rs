//! Exact value-set statistics and their combinatorial reconstructions.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::counting::{ChiVector, SMatrix};
use crate::family::FamilySpec;
use crate::report::rat;
use crate::scan::{scan, ScanOptions, ScanTotals};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MomentsError {
    #[error("reconstruction requires 1 <= s <= d - 2, got s = {s}, d = {d}")]
    RegimeViolation { d: usize, s: usize },
    #[error("missing required entry {0}")]
    RangeMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The closed-form middle term as printed.
    Paper,
    /// Measured `S_{m,n}` over the whole range.
    Exact,
}

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

fn uint(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// `C(n, k)` for arbitrary-precision `n`.
pub fn binomial(n: u64, k: usize) -> BigInt {
    if k as u64 > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k as u64 {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn sign(e: usize) -> BigRational {
    if e % 2 == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// `q^e` for possibly negative `e`.
fn q_pow(q: u64, e: i64) -> BigRational {
    let base = int(q);
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

/// `μ_d = Σ_{r=1}^d (−1)^{r−1}/r!`.
pub fn mu(d: usize) -> BigRational {
    let mut fact = BigInt::one();
    let mut acc = BigRational::zero();
    for r in 1..=d {
        fact *= BigInt::from(r);
        acc += sign(r - 1) * BigRational::new(BigInt::one(), fact.clone());
    }
    acc
}

/// `Σ_{r=1}^{d} (−1)^{r−1} C(q,r) q^{1−r}`.
pub fn cohen_exact_mean(q: u64, d: usize) -> BigRational {
    alternating_binomial_sum(q, d)
}

fn alternating_binomial_sum(q: u64, upto: usize) -> BigRational {
    (1..=upto)
        .map(|r| sign(r - 1) * int(binomial(q, r)) * q_pow(q, 1 - r as i64))
        .sum()
}

/// Mean of `V(f_b)` over the family.
pub fn mean_from_scan(totals: &ScanTotals) -> BigRational {
    BigRational::new(BigInt::from(totals.sum_v.clone()), BigInt::from(totals.members))
}

/// Mean of `V(f_b)²` over the family.
pub fn second_moment_from_scan(totals: &ScanTotals) -> BigRational {
    BigRational::new(BigInt::from(totals.sum_v2.clone()), BigInt::from(totals.members))
}

pub fn value_set_mean(spec: &FamilySpec) -> BigRational {
    mean_from_scan(&scan(spec, ScanOptions::default()))
}

pub fn value_set_second_moment(spec: &FamilySpec) -> BigRational {
    second_moment_from_scan(&scan(spec, ScanOptions::default()))
}

/// `Σ_{r=1}^{d−s}(−1)^{r−1}C(q,r)q^{1−r} + q^{−(d−s−1)} Σ_{r=d−s+1}^{d}(−1)^{r−1}χ_r`.
pub fn reconstruct_mean(spec: &FamilySpec, chi: &ChiVector) -> Result<BigRational, MomentsError> {
    let (d, s) = (spec.d(), spec.s());
    if s == 0 || s + 2 > d {
        return Err(MomentsError::RegimeViolation { d, s });
    }
    let q = spec.q() as u64;
    let mut tail = BigRational::zero();
    for r in d - s + 1..=d {
        let c = chi.get(r).ok_or_else(|| MomentsError::RangeMismatch(format!("chi_{r}")))?;
        tail += sign(r - 1) * uint(c);
    }
    Ok(alternating_binomial_sum(q, d - s) + tail * q_pow(q, -((d - s - 1) as i64)))
}

/// Second-moment reconstruction from `S_{m,n}`.
///
/// Both modes add `q^{−(d−s−1)} Σ (−1)^{m+n} S_{m,n}` over `d−s+1 ≤ m+n ≤ 2d`.
/// For `2 ≤ m+n ≤ d−s`, `Paper` uses `C(q,m)C(q,n)q^{2−m−n}` while `Exact`
/// uses the measured `S_{m,n}` scaled the same way as the high range.
pub fn reconstruct_second_moment(
    spec: &FamilySpec,
    mean: &BigRational,
    s_matrix: &SMatrix,
    mode: Mode,
) -> Result<BigRational, MomentsError> {
    let (d, s) = (spec.d(), spec.s());
    let q = spec.q() as u64;
    let scale = q_pow(q, -((d - s - 1) as i64));
    let mut total = mean.clone();
    for m in 1..=d {
        for n in 1..=d {
            let sum = m + n;
            let cell = || {
                s_matrix
                    .get(m, n)
                    .map(uint)
                    .ok_or_else(|| MomentsError::RangeMismatch(format!("S_{m},{n}")))
            };
            if sum <= d - s {
                total += match mode {
                    Mode::Paper => sign(sum) * int(binomial(q, m) * binomial(q, n)) * q_pow(q, 2 - sum as i64),
                    Mode::Exact => sign(sum) * cell()? * &scale,
                };
            } else {
                total += sign(sum) * cell()? * &scale;
            }
        }
    }
    Ok(total)
}

/// Rational enclosure `[lo, hi]` of `1 − e^{−1}` of width below `10^{−digits}`,
/// from consecutive partial sums of the alternating series for `e^{−1}`.
pub fn one_minus_inv_e_enclosure(digits: u32) -> (BigRational, BigRational) {
    let target = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), digits as usize));
    let mut partial = BigRational::one();
    let mut fact = BigInt::one();
    let mut k = 0usize;
    loop {
        k += 1;
        fact *= BigInt::from(k);
        let term = BigRational::new(BigInt::one(), fact.clone());
        let next = &partial + sign(k) * &term;
        if term < target {
            let (lo, hi) = if partial < next { (partial, next) } else { (next, partial) };
            return (BigRational::one() - hi, BigRational::one() - lo);
        }
        partial = next;
    }
}

/// Exact statistics of one family with their reconstructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentReport {
    pub key: String,
    pub q: u32,
    pub d: usize,
    pub s: usize,
    pub mean: BigRational,
    pub second_moment: BigRational,
    pub chi: ChiVector,
    pub s_matrix: SMatrix,
    /// `None` outside `1 ≤ s ≤ d − 2`.
    pub mean_reconstructed: Option<BigRational>,
    pub second_moment_exact: BigRational,
    pub second_moment_paper: BigRational,
}

impl MomentReport {
    pub fn from_scan(spec: &FamilySpec, totals: &ScanTotals) -> Self {
        let mean = mean_from_scan(totals);
        let chi = ChiVector::from_scan(spec, totals);
        let s_matrix = SMatrix::from_scan(totals);
        let exact = reconstruct_second_moment(spec, &mean, &s_matrix, Mode::Exact).expect("full matrix");
        let paper = reconstruct_second_moment(spec, &mean, &s_matrix, Mode::Paper).expect("full matrix");
        MomentReport {
            key: spec.key(),
            q: spec.q(),
            d: spec.d(),
            s: spec.s(),
            mean_reconstructed: reconstruct_mean(spec, &chi).ok(),
            mean,
            second_moment: second_moment_from_scan(totals),
            chi,
            s_matrix,
            second_moment_exact: exact,
            second_moment_paper: paper,
        }
    }

    pub fn compute(spec: &FamilySpec) -> Self {
        MomentReport::from_scan(spec, &scan(spec, ScanOptions::default()))
    }

    /// `μ_d · q`.
    pub fn mean_main_term(&self) -> BigRational {
        mu(self.d) * int(self.q)
    }

    /// `μ_d² · q²`.
    pub fn second_moment_main_term(&self) -> BigRational {
        let m = self.mean_main_term();
        &m * &m
    }

    pub fn mean_residual(&self) -> BigRational {
        &self.mean - self.mean_main_term()
    }

    pub fn second_moment_residual(&self) -> BigRational {
        &self.second_moment - self.second_moment_main_term()
    }

    /// Printed-formula value minus the exact value.
    pub fn paper_residual(&self) -> BigRational {
        &self.second_moment_paper - &self.second_moment_exact
    }

    pub fn mean_identity_holds(&self) -> Option<bool> {
        self.mean_reconstructed.as_ref().map(|m| *m == self.mean)
    }

    pub fn second_moment_identity_holds(&self) -> bool {
        self.second_moment_exact == self.second_moment
    }

    pub fn to_serializable(&self) -> MomentReportOut {
        MomentReportOut {
            key: self.key.clone(),
            q: self.q,
            d: self.d,
            s: self.s,
            mean: rat(&self.mean),
            mu_d_q: rat(&self.mean_main_term()),
            mean_residual: rat(&self.mean_residual()),
            mean_reconstructed: self.mean_reconstructed.as_ref().map(rat),
            mean_identity: self.mean_identity_holds(),
            second_moment: rat(&self.second_moment),
            mu_d2_q2: rat(&self.second_moment_main_term()),
            second_moment_residual: rat(&self.second_moment_residual()),
            second_moment_exact: rat(&self.second_moment_exact),
            second_moment_paper: rat(&self.second_moment_paper),
            paper_residual: rat(&self.paper_residual()),
            second_moment_identity: self.second_moment_identity_holds(),
            chi: self.chi.0.iter().map(|(r, c)| (r.to_string(), c.to_string())).collect(),
            s_matrix: self
                .s_matrix
                .0
                .iter()
                .map(|((m, n), c)| (format!("{m},{n}"), c.to_string()))
                .collect(),
        }
    }
}

/// JSON shape of a [`MomentReport`]; rationals as `"num/den"`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReportOut {
    pub key: String,
    pub q: u32,
    pub d: usize,
    pub s: usize,
    pub mean: String,
    pub mu_d_q: String,
    pub mean_residual: String,
    pub mean_reconstructed: Option<String>,
    pub mean_identity: Option<bool>,
    pub second_moment: String,
    pub mu_d2_q2: String,
    pub second_moment_residual: String,
    pub second_moment_exact: String,
    pub second_moment_paper: String,
    pub paper_residual: String,
    pub second_moment_identity: bool,
    pub chi: std::collections::BTreeMap<String, String>,
    pub s_matrix: std::collections::BTreeMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{enumerate_b, value_profile};
    use crate::gf::make_field;
    use std::sync::Arc;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(1), r(1, 1));
        assert_eq!(mu(2), r(1, 2));
        assert_eq!(mu(5), r(19, 30));
    }

    #[test]
    fn cohen_values() {
        assert_eq!(cohen_exact_mean(7, 2), r(4, 1));
        assert_eq!(cohen_exact_mean(5, 3), r(17, 5));
        assert_eq!(cohen_exact_mean(11, 1), r(11, 1));
    }

    #[test]
    fn brute_force_means() {
        let f7 = Arc::new(make_field(7, 1, None).unwrap());
        let spec = FamilySpec::new(f7.clone(), 2, 0, vec![]).unwrap();
        assert_eq!(value_set_mean(&spec), r(4, 1));
        assert_eq!(value_set_second_moment(&spec), r(16, 1));
        let lin = FamilySpec::new(f7, 1, 0, vec![]).unwrap();
        assert_eq!(value_set_mean(&lin), r(7, 1));
        let f5 = Arc::new(make_field(5, 1, None).unwrap());
        let cubic = FamilySpec::new(f5, 3, 0, vec![]).unwrap();
        let naive: usize = enumerate_b(&cubic)
            .map(|b| value_profile(&cubic, &b).unwrap().value_set_size())
            .sum();
        assert_eq!(value_set_mean(&cubic), r(naive as i64, 25));
        assert_eq!(value_set_mean(&cubic), cohen_exact_mean(5, 3));
    }

    #[test]
    fn reconstructions() {
        let f7 = Arc::new(make_field(7, 1, None).unwrap());
        let spec = FamilySpec::new(f7.clone(), 4, 1, vec![f7.element(1)]).unwrap();
        let report = MomentReport::compute(&spec);
        assert_eq!(report.mean_identity_holds(), Some(true));
        assert!(report.second_moment_identity_holds());
        let spec2 = FamilySpec::new(f7.clone(), 4, 2, vec![f7.element(1), f7.element(2)]).unwrap();
        assert_eq!(MomentReport::compute(&spec2).mean_identity_holds(), Some(true));
        let s0 = FamilySpec::new(f7, 4, 0, vec![]).unwrap();
        let chi = ChiVector((1..=4).map(|r| (r, BigUint::zero())).collect());
        assert_eq!(reconstruct_mean(&s0, &chi), Err(MomentsError::RegimeViolation { d: 4, s: 0 }));
        assert!(matches!(
            reconstruct_second_moment(&spec, &r(1, 1), &SMatrix::default(), Mode::Exact),
            Err(MomentsError::RangeMismatch(_))
        ));
    }

    #[test]
    fn enclosure() {
        let (lo, hi) = one_minus_inv_e_enclosure(50);
        assert!(lo < hi);
        assert!(&hi - &lo < BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 50)));
        assert!(lo > r(632, 1000) && hi < r(633, 1000));
    }
}
