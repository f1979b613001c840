//! Explicit error bounds, their hypotheses, and the unimodality of
//! `h(k) = C(d,k)²(d−k)!`.
//!
//! Left-hand sides are exact rationals; right-hand sides are floats. A check
//! passes when `lhs ≤ rhs·(1 + 1e−9)`, comparing against the float converted
//! exactly to a rational.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::counting::gamma_r_from_scan;
use crate::family::FamilySpec;
use crate::moments::{binomial, mean_from_scan, mu, second_moment_from_scan};
use crate::report::{float17, rat};
use crate::scan::{scan, ScanOptions, ScanTotals};

/// Relative slack applied to every right-hand side.
pub const SLACK: f64 = 1e-9;

/// Above this degree right-hand sides are evaluated in log space.
pub const LOG_SPACE_ABOVE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("bound `{kind}` needs parameter `{param}`")]
    MissingParameter { kind: BoundKind, param: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    MeanMain,
    MeanRefined,
    Chi,
    GammaStar,
    Smn,
    SmnS0,
    V2,
    V2S0,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::MeanMain,
        BoundKind::MeanRefined,
        BoundKind::Chi,
        BoundKind::GammaStar,
        BoundKind::Smn,
        BoundKind::SmnS0,
        BoundKind::V2,
        BoundKind::V2S0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::MeanMain => "mean_main",
            BoundKind::MeanRefined => "mean_refined",
            BoundKind::Chi => "chi",
            BoundKind::GammaStar => "gamma_star",
            BoundKind::Smn => "smn",
            BoundKind::SmnS0 => "smn_s0",
            BoundKind::V2 => "v2",
            BoundKind::V2S0 => "v2_s0",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown bound kind `{s}`"))
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product::<BigUint>().max(BigUint::one())
}

/// Exact parameters entering the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub d: usize,
}

impl BoundParams {
    pub fn new(d: usize) -> Self {
        BoundParams { d }
    }

    /// `D_r = rd − r(r+1)/2`.
    pub fn big_d_r(&self, r: usize) -> BigInt {
        BigInt::from(r * self.d) - BigInt::from(r * (r + 1) / 2)
    }

    /// `δ_r = d!/(d−r)!`.
    pub fn delta_r(&self, r: usize) -> BigUint {
        factorial(self.d) / factorial(self.d - r)
    }

    /// `D_{m,n} = (m+n)d − C(m+1,2) − C(n+1,2)`.
    pub fn big_d_mn(&self, m: usize, n: usize) -> BigInt {
        BigInt::from((m + n) * self.d) - BigInt::from(m * (m + 1) / 2) - BigInt::from(n * (n + 1) / 2)
    }

    /// `δ_{m,n} = (d!)²/((d−m)!(d−n)!)`.
    pub fn delta_mn(&self, m: usize, n: usize) -> BigUint {
        self.delta_r(m) * self.delta_r(n)
    }

    /// `ξ_{m,n} = C(m,2) + C(n,2) + 1`.
    pub fn xi(&self, m: usize, n: usize) -> u64 {
        (m * m.saturating_sub(1) / 2 + n * n.saturating_sub(1) / 2 + 1) as u64
    }

    /// `k₀ = −1/2 + √(5+4d)/2`.
    pub fn k0(&self) -> f64 {
        -0.5 + ((5 + 4 * self.d) as f64).sqrt() / 2.0
    }

    /// `⌊k₀⌋` in exact integer arithmetic.
    pub fn floor_k0(&self) -> usize {
        ((5 + 4 * self.d).sqrt() - 1) / 2
    }

    /// `h(k) = C(d,k)²(d−k)!`.
    pub fn h(&self, k: usize) -> BigUint {
        let c = binomial(self.d as u64, k).to_biguint().expect("nonnegative");
        &c * &c * factorial(self.d - k)
    }

    /// `Σ_{k=0}^{s−1} h(k)`.
    pub fn h_prefix_sum(&self, s: usize) -> BigUint {
        (0..s).map(|k| self.h(k)).sum()
    }
}

/// Which theorems' hypotheses hold, each evaluated literally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Applicability {
    pub mean_main: bool,
    pub mean_refined: bool,
    pub chi: bool,
    pub gamma_star: bool,
    pub smn: bool,
    pub smn_s0: bool,
    pub v2: bool,
    pub v2_s0: bool,
}

impl Applicability {
    pub fn get(&self, kind: BoundKind) -> bool {
        match kind {
            BoundKind::MeanMain => self.mean_main,
            BoundKind::MeanRefined => self.mean_refined,
            BoundKind::Chi => self.chi,
            BoundKind::GammaStar => self.gamma_star,
            BoundKind::Smn => self.smn,
            BoundKind::SmnS0 => self.smn_s0,
            BoundKind::V2 => self.v2,
            BoundKind::V2S0 => self.v2_s0,
        }
    }

    pub fn any(&self) -> bool {
        BoundKind::ALL.into_iter().any(|k| self.get(k))
    }
}

fn is_odd_prime(p: u64) -> bool {
    p > 2 && (2..).take_while(|i| i * i <= p).all(|i| p % i != 0)
}

pub fn applicability(q: u64, d: usize, s: usize, p: u64) -> Applicability {
    if !is_odd_prime(p) || q <= d as u64 {
        return Applicability::default();
    }
    let three = p == 3;
    let s_le = |gap_big: usize, gap_three: usize| {
        let gap = if three { gap_three } else { gap_big };
        s >= 1 && d >= gap && s <= d - gap
    };
    let s0_d = s == 0 && d >= if three { 9 } else { 5 };
    let chi = s_le(3, 6);
    Applicability {
        mean_main: s_le(4, 6),
        mean_refined: chi,
        chi,
        gamma_star: chi,
        smn: s_le(4, 6),
        smn_s0: s0_d,
        v2: s_le(4, 6),
        v2_s0: s0_d,
    }
}

/// One additive term `coef · e^{extra} · q^{q_exp}`.
struct Term {
    coef: BigRational,
    extra: f64,
    q_exp: f64,
}

fn term(coef: BigRational, extra: f64, q_exp: f64) -> Term {
    Term { coef, extra, q_exp }
}

fn ratio(n: BigInt, d: BigUint) -> BigRational {
    BigRational::new(n, BigInt::from(d))
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("finite").abs().ln();
    }
    let shift = bits - 60;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(x: &BigRational) -> f64 {
    ln_big(x.numer()) - ln_big(x.denom())
}

fn eval_terms(terms: &[Term], q: f64, log_space: bool) -> f64 {
    terms
        .iter()
        .map(|t| {
            if t.coef.is_zero() {
                return 0.0;
            }
            let sign = if t.coef.is_negative() { -1.0 } else { 1.0 };
            if log_space {
                sign * (ln_rational(&t.coef) + t.extra + t.q_exp * q.ln()).exp()
            } else {
                t.coef.to_f64().expect("finite") * t.extra.exp() * q.powf(t.q_exp)
            }
        })
        .sum()
}

fn pow_int(base: usize, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), e)
}

fn terms_for(
    kind: BoundKind,
    d: usize,
    s: usize,
    r: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
) -> Result<Vec<Term>, BoundsError> {
    let bp = BoundParams::new(d);
    let missing = |param| BoundsError::MissingParameter { kind, param };
    let df = d as f64;
    let int = |x: BigInt| BigRational::from_integer(x);
    let ds = d as f64 - s as f64;
    Ok(match kind {
        BoundKind::MeanMain => vec![
            term(int(pow_int(d, 2) * pow_int(2, d - 1)), 0.0, 0.5),
            term(int(BigInt::from(49) * pow_int(d, d + 5)), 2.0 * df.sqrt() - df, 0.0),
        ],
        BoundKind::MeanRefined => vec![
            term(int(pow_int(d, 2) * pow_int(2, d - 1)), 0.0, 0.5),
            term(
                BigRational::new(BigInt::from(7), BigInt::from(2))
                    * int(pow_int(d, 4) * BigInt::from(bp.h_prefix_sum(s))),
                0.0,
                0.0,
            ),
        ],
        BoundKind::Chi | BoundKind::GammaStar => {
            let r = r.ok_or_else(|| missing("r"))?;
            let (big_d, delta) = (bp.big_d_r(r), BigInt::from(bp.delta_r(r)));
            let first = &delta * (&big_d - 2) + 2;
            let second = BigInt::from(14) * &big_d * &big_d * &delta * &delta;
            if kind == BoundKind::GammaStar {
                vec![term(int(first), 0.0, ds - 0.5), term(int(second), 0.0, ds - 1.0)]
            } else {
                let rf = factorial(r);
                let extra = BigInt::from(r * (r - 1)) * &delta;
                vec![
                    term(ratio(first, rf.clone()), 0.0, ds - 0.5),
                    term(ratio(second * 2 + extra, rf * 2u32), 0.0, ds - 1.0),
                ]
            }
        }
        BoundKind::Smn | BoundKind::SmnS0 => {
            let m = m.ok_or_else(|| missing("m"))?;
            let n = n.ok_or_else(|| missing("n"))?;
            let (big_d, delta) = (bp.big_d_mn(m, n), BigInt::from(bp.delta_mn(m, n)));
            let xi_delta = BigInt::from(bp.xi(m, n)) * &delta;
            let denom = factorial(m) * factorial(n);
            if kind == BoundKind::Smn {
                let first = &delta * (&big_d - 2) + 2;
                let second = BigInt::from(14) * &big_d * &big_d * &delta * &delta + xi_delta;
                vec![
                    term(ratio(first, denom.clone()), 0.0, ds + 0.5),
                    term(ratio(second, denom), 0.0, ds),
                ]
            } else {
                let only = BigInt::from(14) * &big_d * &big_d * &big_d * &delta * &delta + xi_delta;
                vec![term(ratio(only, denom), 0.0, df)]
            }
        }
        BoundKind::V2 => vec![
            term(int(pow_int(d, 2) * pow_int(2, 2 * d + 1)), 0.0, 1.5),
            term(int(pow_int(14, 3) * pow_int(d, 2 * d + 6)), 4.0 * df.sqrt() - 2.0 * df, 1.0),
        ],
        BoundKind::V2S0 => vec![
            term(int(pow_int(d, 2) * pow_int(2, 2 * d - 2)), 0.0, 1.0),
            term(int(pow_int(14, 3) * pow_int(d, 2 * d + 8)), 4.0 * df.sqrt() - 2.0 * df, 1.0),
        ],
    })
}

/// Right-hand side of the named bound as a float.
pub fn bound_value(
    kind: BoundKind,
    q: u64,
    d: usize,
    s: usize,
    r: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
) -> Result<f64, BoundsError> {
    let terms = terms_for(kind, d, s, r, m, n)?;
    Ok(eval_terms(&terms, q as f64, d > LOG_SPACE_ABOVE))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub q: u64,
    pub d: usize,
    pub s: usize,
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    /// `|exact statistic − main term|`.
    pub lhs: BigRational,
    pub rhs: f64,
    pub applicable: bool,
    /// `None` when not applicable.
    pub pass: Option<bool>,
}

impl BoundCheck {
    fn new(
        kind: BoundKind,
        spec: &FamilySpec,
        idx: (Option<usize>, Option<usize>, Option<usize>),
        lhs: BigRational,
        applicable: bool,
    ) -> Self {
        let (q, d, s) = (spec.q() as u64, spec.d(), spec.s());
        let rhs = bound_value(kind, q, d, s, idx.0, idx.1, idx.2).expect("indices supplied");
        let pass = applicable.then(|| passes(&lhs, rhs));
        BoundCheck { kind, q, d, s, r: idx.0, m: idx.1, n: idx.2, lhs, rhs, applicable, pass }
    }

    pub fn to_serializable(&self) -> BoundCheckOut {
        BoundCheckOut {
            kind: self.kind.name().to_string(),
            q: self.q,
            d: self.d,
            s: self.s,
            r: self.r,
            m: self.m,
            n: self.n,
            lhs: rat(&self.lhs),
            rhs: float17(self.rhs),
            applicable: self.applicable,
            pass: self.pass,
        }
    }
}

/// Flat form of a [`BoundCheck`].
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheckOut {
    pub kind: String,
    pub q: u64,
    pub d: usize,
    pub s: usize,
    pub r: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub lhs: String,
    pub rhs: String,
    pub applicable: bool,
    pub pass: Option<bool>,
}

/// `lhs ≤ rhs·(1 + SLACK)`, with the float taken exactly.
pub fn passes(lhs: &BigRational, rhs: f64) -> bool {
    match BigRational::from_float(rhs * (1.0 + SLACK)) {
        Some(bound) => *lhs <= bound,
        None => rhs.is_infinite() && rhs > 0.0,
    }
}

fn q_pow_big(q: u64, e: usize) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(q), e))
}

fn big(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// All checks for one family from a scan run with multiplicities.
pub fn bound_suite_from_scan(spec: &FamilySpec, totals: &ScanTotals) -> Vec<BoundCheck> {
    let (q, d, s) = (spec.q() as u64, spec.d(), spec.s());
    let app = applicability(q, d, s, spec.field().p() as u64);
    let mut out = Vec::new();
    let mu_q = mu(d) * BigRational::from_integer(BigInt::from(q));
    let mean_dev = (mean_from_scan(totals) - &mu_q).abs();
    let v2_dev = (second_moment_from_scan(totals) - &mu_q * &mu_q).abs();
    for kind in [BoundKind::MeanMain, BoundKind::MeanRefined] {
        out.push(BoundCheck::new(kind, spec, (None, None, None), mean_dev.clone(), app.get(kind)));
    }
    for kind in [BoundKind::V2, BoundKind::V2S0] {
        out.push(BoundCheck::new(kind, spec, (None, None, None), v2_dev.clone(), app.get(kind)));
    }
    let main_ds = q_pow_big(q, d - s);
    for r in d - s + 1..=d {
        let fact = big(&factorial(r));
        let chi_dev = (big(&totals.binom[r]) - &main_ds / fact).abs();
        out.push(BoundCheck::new(BoundKind::Chi, spec, (Some(r), None, None), chi_dev, app.chi));
        if let Some(g) = gamma_r_from_scan(totals, r) {
            let dev = (big(&g.closed) - &main_ds).abs();
            out.push(BoundCheck::new(BoundKind::GammaStar, spec, (Some(r), None, None), dev, app.gamma_star));
        }
    }
    let smn_kind = if s == 0 { BoundKind::SmnS0 } else { BoundKind::Smn };
    let main_smn = q_pow_big(q, d - s + 1);
    for m in 1..=d {
        for n in 1..=d {
            if m + n < d - s + 1 {
                continue;
            }
            let denom = big(&(factorial(m) * factorial(n)));
            let dev = (big(&totals.smn[m][n]) - &main_smn / denom).abs();
            out.push(BoundCheck::new(smn_kind, spec, (None, Some(m), Some(n)), dev, app.get(smn_kind)));
        }
    }
    out
}

pub fn bound_suite(spec: &FamilySpec) -> Vec<BoundCheck> {
    let totals = scan(spec, ScanOptions { multiplicities: true, ..Default::default() });
    bound_suite_from_scan(spec, &totals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Increasing,
    Unimodal,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnimodalityAudit {
    pub d: usize,
    pub k0: f64,
    pub floor_k0: usize,
    pub h: Vec<BigUint>,
    pub argmax: Vec<usize>,
    pub classification: Shape,
    pub floor_k0_is_max: bool,
}

/// Evaluates `h(k)` for `k ∈ [0, d−1]` and classifies its shape.
pub fn unimodality_audit(d: usize) -> UnimodalityAudit {
    assert!(d >= 2);
    let bp = BoundParams::new(d);
    let h: Vec<BigUint> = (0..d).map(|k| bp.h(k)).collect();
    let max = h.iter().max().expect("nonempty").clone();
    let argmax: Vec<usize> = (0..d).filter(|&k| h[k] == max).collect();
    let rising = h.windows(2).take_while(|w| w[0] <= w[1]).count();
    let falls = h[rising..].windows(2).all(|w| w[0] >= w[1]);
    let classification = if rising == d - 1 {
        Shape::Increasing
    } else if falls {
        Shape::Unimodal
    } else {
        Shape::Other
    };
    let floor_k0 = bp.floor_k0();
    UnimodalityAudit {
        d,
        k0: bp.k0(),
        floor_k0,
        floor_k0_is_max: argmax.contains(&floor_k0),
        h,
        argmax,
        classification,
    }
}
