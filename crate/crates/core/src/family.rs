//! The family `f_b = T^d + a_{d−1}T^{d−1} + … + a_{d−s}T^{d−s} + b_{d−s−1}T^{d−s−1} + … + b_1 T`.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{FieldElement, FieldSpec, GfError};
use crate::upoly::UniPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid family parameters: d = {d}, s = {s}")]
    InvalidParameters { d: usize, s: usize },
    #[error("q = {q} does not exceed d = {d}")]
    FieldTooSmall { q: u32, d: usize },
    #[error("invalid family key `{0}`")]
    BadKey(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    field: Arc<FieldSpec>,
    d: usize,
    s: usize,
    a: Vec<FieldElement>,
}

impl FamilySpec {
    /// `a = (a_{d−1}, …, a_{d−s})`. Requires `s ≤ d − 2`, except that the
    /// degenerate linear family `d = 1, s = 0` is accepted.
    pub fn new(field: Arc<FieldSpec>, d: usize, s: usize, a: Vec<FieldElement>) -> Result<Self, FamilyError> {
        let ok = (d >= 2 && s + 2 <= d) || (d == 1 && s == 0);
        if !ok {
            return Err(FamilyError::InvalidParameters { d, s });
        }
        if a.len() != s {
            return Err(FamilyError::LengthMismatch { expected: s, got: a.len() });
        }
        assert!(a.iter().all(|x| x.index() < field.q()), "coefficient outside the field");
        Ok(FamilySpec { field, d, s, a })
    }

    /// As [`FamilySpec::new`], additionally rejecting `q ≤ d`.
    pub fn new_strict(field: Arc<FieldSpec>, d: usize, s: usize, a: Vec<FieldElement>) -> Result<Self, FamilyError> {
        let spec = FamilySpec::new(field, d, s, a)?;
        if !spec.q_exceeds_d() {
            return Err(FamilyError::FieldTooSmall { q: spec.q(), d });
        }
        Ok(spec)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn a(&self) -> &[FieldElement] {
        &self.a
    }

    /// Number of free coefficients `d − s − 1`.
    pub fn free_len(&self) -> usize {
        self.d - self.s - 1
    }

    /// `q^{d−s−1}`.
    pub fn member_count(&self) -> u64 {
        (self.q() as u64)
            .checked_pow(self.free_len() as u32)
            .expect("family too large to enumerate")
    }

    pub fn q_exceeds_d(&self) -> bool {
        self.q() as usize > self.d
    }

    /// `"q=<descriptor>;d=<d>;s=<s>;a=<comma list>"`.
    pub fn key(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|x| x.index().to_string()).collect();
        format!("q={};d={};s={};a={}", self.field.descriptor(), self.d, self.s, a.join(","))
    }

    pub fn parse_key(key: &str) -> Result<Self, FamilyError> {
        let bad = || FamilyError::BadKey(key.to_string());
        let mut field = None;
        let (mut d, mut s, mut a) = (None, None, None);
        for part in key.split(';') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "q" => field = Some(v.parse::<FieldSpec>()?),
                "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
                "s" => s = Some(v.parse::<usize>().map_err(|_| bad())?),
                "a" => a = Some(v.to_string()),
                _ => return Err(bad()),
            }
        }
        let (field, d, s, a) = (field.ok_or_else(bad)?, d.ok_or_else(bad)?, s.ok_or_else(bad)?, a.ok_or_else(bad)?);
        let a = if a.trim().is_empty() {
            Vec::new()
        } else {
            a.split(',')
                .map(|x| {
                    let idx: u64 = x.trim().parse().map_err(|_| bad())?;
                    field.try_element(idx).ok_or_else(bad)
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        FamilySpec::new(Arc::new(field), d, s, a)
    }

    /// Low-to-high coefficients of `f_b + b0`.
    pub fn coeffs(&self, b: &[FieldElement], b0: FieldElement) -> Result<Vec<FieldElement>, FamilyError> {
        let len = self.free_len();
        if b.len() != len {
            return Err(FamilyError::LengthMismatch { expected: len, got: b.len() });
        }
        let d = self.d;
        let mut c = vec![FieldElement::ZERO; d + 1];
        c[d] = FieldElement::ONE;
        for (i, &x) in self.a.iter().enumerate() {
            c[d - 1 - i] = x;
        }
        for (i, &x) in b.iter().enumerate() {
            c[len - i] = x;
        }
        c[0] = b0;
        Ok(c)
    }

    /// The fixed part `f_a = T^d + a_{d−1}T^{d−1} + … + a_{d−s}T^{d−s}`.
    pub fn fixed_part(&self) -> UniPoly {
        let zeros = vec![FieldElement::ZERO; self.free_len()];
        UniPoly::new(self.coeffs(&zeros, FieldElement::ZERO).expect("length matches"))
    }

    /// The `i`-th member in lexicographic order (first coordinate most significant).
    pub fn b_at(&self, index: u64) -> Vec<FieldElement> {
        let len = self.free_len();
        let q = self.q() as u64;
        let mut out = vec![FieldElement::ZERO; len];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = self.field.element((rest % q) as u32);
            rest /= q;
        }
        out
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// `f_b + b0` as a polynomial.
pub fn family_poly(spec: &FamilySpec, b: &[FieldElement], b0: FieldElement) -> Result<UniPoly, FamilyError> {
    Ok(UniPoly::new(spec.coeffs(b, b0)?))
}

/// `counts[index(c)] = #{t : f_b(t) = c}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueProfile {
    pub counts: Vec<u32>,
}

impl ValueProfile {
    pub fn count(&self, c: FieldElement) -> u32 {
        self.counts[c.index() as usize]
    }

    /// Distinct values taken, `V(f_b)`.
    pub fn value_set_size(&self) -> usize {
        self.counts.iter().filter(|&&n| n > 0).count()
    }

    /// `hist[N] = #{c : N_b(c) = N}`.
    pub fn histogram(&self, d: usize) -> Vec<u64> {
        let mut hist = vec![0u64; d + 1];
        for &n in &self.counts {
            hist[n as usize] += 1;
        }
        hist
    }
}

pub fn value_profile(spec: &FamilySpec, b: &[FieldElement]) -> Result<ValueProfile, FamilyError> {
    let f = family_poly(spec, b, FieldElement::ZERO)?;
    let mut counts = vec![0u32; spec.q() as usize];
    for t in spec.field().elements() {
        counts[f.eval(spec.field(), t).index() as usize] += 1;
    }
    Ok(ValueProfile { counts })
}

/// All `b ∈ F_q^{d−s−1}` in lexicographic order.
pub fn enumerate_b(spec: &FamilySpec) -> impl Iterator<Item = Vec<FieldElement>> + '_ {
    enumerate_b_range(spec, 0..spec.member_count())
}

pub fn enumerate_b_range(spec: &FamilySpec, range: Range<u64>) -> impl Iterator<Item = Vec<FieldElement>> + '_ {
    range.map(move |i| spec.b_at(i))
}

/// Contiguous index ranges covering all members, each of length at most `chunk`.
pub fn b_chunks(spec: &FamilySpec, chunk: u64) -> Vec<Range<u64>> {
    assert!(chunk > 0);
    let total = spec.member_count();
    (0..total.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(total))
        .collect()
}
