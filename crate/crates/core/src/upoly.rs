//! Dense univariate polynomials over `F_q`.
//!
//! Polynomials are plain values; every operation takes the field explicitly.
//! The zero polynomial has no degree (`degree()` returns `None`).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::gf::{FieldElement, FieldSpec};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not monic")]
    NonMonic,
    #[error("degree {0} is below the required minimum")]
    DegreeTooSmall(usize),
    #[error("invalid polynomial text `{0}`")]
    BadText(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<FieldElement>,
}

impl UniPoly {
    /// Builds from low-to-high coefficients, trimming high zeros.
    pub fn new(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: FieldElement) -> Self {
        UniPoly::new(vec![c])
    }

    /// `c·T^k`.
    pub fn monomial(c: FieldElement, k: usize) -> Self {
        let mut coeffs = vec![FieldElement::ZERO; k + 1];
        coeffs[k] = c;
        UniPoly::new(coeffs)
    }

    /// `T − a`.
    pub fn linear_root(field: &FieldSpec, a: FieldElement) -> Self {
        UniPoly::new(vec![field.neg(a), FieldElement::ONE])
    }

    /// `∏ (T − a_i)`.
    pub fn from_roots(field: &FieldSpec, roots: &[FieldElement]) -> Self {
        roots.iter().fold(UniPoly::constant(FieldElement::ONE), |acc, &a| {
            acc.mul(field, &UniPoly::linear_root(field, a))
        })
    }

    /// Parses `"c_0,c_1,...,c_n"` (canonical indices, low to high).
    pub fn parse(field: &FieldSpec, text: &str) -> Result<Self, PolyError> {
        let bad = || PolyError::BadText(text.to_string());
        let coeffs = text
            .split(',')
            .map(|c| {
                let idx: u64 = c.trim().parse().map_err(|_| bad())?;
                field.try_element(idx).ok_or_else(bad)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(UniPoly::new(coeffs))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(FieldElement::ONE)
    }

    pub fn eval(&self, field: &FieldSpec, t: FieldElement) -> FieldElement {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| field.add(field.mul(acc, t), c))
    }

    /// Values at every element, in canonical order.
    pub fn batch_eval(&self, field: &FieldSpec) -> Vec<FieldElement> {
        field.elements().map(|t| self.eval(field, t)).collect()
    }

    pub fn add(&self, field: &FieldSpec, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..n).map(|i| field.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, field: &FieldSpec, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new((0..n).map(|i| field.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn scale(&self, field: &FieldSpec, c: FieldElement) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|&x| field.mul(x, c)).collect())
    }

    pub fn mul(&self, field: &FieldSpec, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![FieldElement::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        UniPoly::new(out)
    }

    pub fn derivative(&self, field: &FieldSpec) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| field.mul_int(c, i as u64))
                .collect(),
        )
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, field: &FieldSpec, divisor: &UniPoly) -> Result<(UniPoly, UniPoly), PolyError> {
        let dd = divisor.degree().ok_or(PolyError::ZeroPolynomial)?;
        let lc_inv = field.inv(divisor.coeffs[dd]).expect("leading coefficient is nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((UniPoly::zero(), self.clone()));
        }
        let mut quot = vec![FieldElement::ZERO; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = field.mul(rem[top], lc_inv);
            if c.is_zero() {
                continue;
            }
            quot[top - dd] = c;
            for (i, &dc) in divisor.coeffs.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = field.sub(rem[idx], field.mul(c, dc));
            }
        }
        rem.truncate(dd);
        Ok((UniPoly::new(quot), UniPoly::new(rem)))
    }

    /// Division by `T − a`: returns `(quotient, f(a))`.
    pub fn synthetic_div(&self, field: &FieldSpec, a: FieldElement) -> (UniPoly, FieldElement) {
        if self.coeffs.is_empty() {
            return (UniPoly::zero(), FieldElement::ZERO);
        }
        let n = self.coeffs.len();
        let mut quot = vec![FieldElement::ZERO; n - 1];
        let mut carry = FieldElement::ZERO;
        for i in (0..n).rev() {
            carry = field.add(field.mul(carry, a), self.coeffs[i]);
            if i > 0 {
                quot[i - 1] = carry;
            }
        }
        (UniPoly::new(quot), carry)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, field: &FieldSpec, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(field, &b).expect("b is nonzero");
            a = b;
            b = r;
        }
        match a.leading() {
            Some(lc) => a.scale(field, field.inv(lc).expect("nonzero")),
            None => a,
        }
    }

    /// Comma-separated canonical indices, low to high; `"0"` for zero.
    pub fn to_text(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        self.coeffs
            .iter()
            .map(|c| c.index().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RootProfile {
    pub roots: BTreeMap<FieldElement, u32>,
}

impl RootProfile {
    pub fn distinct_count(&self) -> usize {
        self.roots.len()
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.roots.values().sum()
    }

    pub fn multiplicity(&self, a: FieldElement) -> u32 {
        self.roots.get(&a).copied().unwrap_or(0)
    }
}

/// Multiplicity of `a` as a root of `f` (nonzero), by repeated synthetic division.
pub fn root_multiplicity(field: &FieldSpec, f: &UniPoly, a: FieldElement) -> u32 {
    let mut g = f.clone();
    let mut mult = 0;
    while !g.is_zero() {
        let (quot, rem) = g.synthetic_div(field, a);
        if !rem.is_zero() {
            break;
        }
        mult += 1;
        g = quot;
    }
    mult
}

pub fn root_profile(field: &FieldSpec, f: &UniPoly) -> Result<RootProfile, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let roots = field
        .elements()
        .filter_map(|a| {
            let m = root_multiplicity(field, f, a);
            (m > 0).then_some((a, m))
        })
        .collect();
    Ok(RootProfile { roots })
}

/// Diagonal divided differences `c_i = Δ^{i−1}f(x_1,…,x_i)` by iterated
/// synthetic division; repeated nodes are allowed.
pub fn newton_coeffs(field: &FieldSpec, f: &UniPoly, nodes: &[FieldElement]) -> Vec<FieldElement> {
    let mut g = f.clone();
    nodes
        .iter()
        .map(|&x| {
            let (quot, c) = g.synthetic_div(field, x);
            g = quot;
            c
        })
        .collect()
}

/// Whether `∏ (T − x_i)` divides `f`, counting multiplicity.
pub fn divides(field: &FieldSpec, f: &UniPoly, nodes: &[FieldElement]) -> bool {
    newton_coeffs(field, f, nodes).iter().all(|c| c.is_zero())
}

/// Principal subresultant coefficient `psc_j` for polynomials given by
/// low-to-high coefficients of formal degrees `f.len() − 1` and `g.len() − 1`.
/// Zero when `j` exceeds either formal degree.
pub fn principal_subresultant(
    field: &FieldSpec,
    f: &[FieldElement],
    g: &[FieldElement],
    j: usize,
) -> FieldElement {
    match linalg::sylvester_minor(f, g, j, &FieldElement::ZERO) {
        Some(m) => linalg::det(field, &m),
        None => FieldElement::ZERO,
    }
}

/// Sylvester resultant with respect to the actual degrees.
pub fn resultant(field: &FieldSpec, f: &UniPoly, g: &UniPoly) -> Result<FieldElement, PolyError> {
    if f.is_zero() || g.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    Ok(principal_subresultant(field, f.coeffs(), g.coeffs(), 0))
}

/// Principal coefficient of the first subresultant, actual degrees.
pub fn subres1(field: &FieldSpec, f: &UniPoly, g: &UniPoly) -> Result<FieldElement, PolyError> {
    if f.is_zero() || g.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    Ok(principal_subresultant(field, f.coeffs(), g.coeffs(), 1))
}

/// `(−1)^{d(d−1)/2} Res(f, f′)` with `f′` taken at formal degree `d − 1`.
pub fn discriminant(field: &FieldSpec, f: &UniPoly) -> Result<FieldElement, PolyError> {
    let d = f.degree().ok_or(PolyError::ZeroPolynomial)?;
    if !f.is_monic() {
        return Err(PolyError::NonMonic);
    }
    if d < 2 {
        return Err(PolyError::DegreeTooSmall(d));
    }
    let mut fp = f.derivative(field).coeffs().to_vec();
    fp.resize(d, FieldElement::ZERO);
    let res = principal_subresultant(field, f.coeffs(), &fp, 0);
    Ok(if (d * (d - 1) / 2) % 2 == 1 { field.neg(res) } else { res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;

    fn poly(field: &FieldSpec, c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&x| field.from_int(x)).collect())
    }

    #[test]
    fn eval_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        let f = poly(&f5, &[1, 0, 1]);
        assert_eq!(f.eval(&f5, f5.element(2)), FieldElement::ZERO);
        assert_eq!(UniPoly::zero().eval(&f5, f5.element(3)), FieldElement::ZERO);
        let mut cube = poly(&f5, &[0, 0, 0, 1]).batch_eval(&f5);
        cube.sort();
        assert_eq!(cube, f5.elements().collect::<Vec<_>>());
    }

    #[test]
    fn root_profile_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        let f7 = make_field(7, 1, None).unwrap();
        // T^2 (T - 1) = T^3 - T^2
        let rp = root_profile(&f5, &poly(&f5, &[0, 0, -1, 1])).unwrap();
        assert_eq!(rp.roots, BTreeMap::from([(f5.element(0), 2), (f5.element(1), 1)]));
        assert_eq!(rp.total_multiplicity(), 3);
        assert_eq!(root_profile(&f7, &poly(&f7, &[1, 0, 1])).unwrap().distinct_count(), 0);
        let rp = root_profile(&f5, &poly(&f5, &[1, 0, 1])).unwrap();
        assert_eq!(rp.roots, BTreeMap::from([(f5.element(2), 1), (f5.element(3), 1)]));
        assert_eq!(root_profile(&f5, &UniPoly::zero()), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn newton_examples() {
        let f7 = make_field(7, 1, None).unwrap();
        let sq = poly(&f7, &[0, 0, 1]);
        let c = newton_coeffs(&f7, &sq, &[f7.element(2), f7.element(3)]);
        assert_eq!(c, vec![f7.element(4), f7.element(5)]);
        for t in f7.elements() {
            let c = newton_coeffs(&f7, &sq, &[t, t]);
            assert_eq!(c[1], sq.derivative(&f7).eval(&f7, t));
        }
        let f5 = make_field(5, 1, None).unwrap();
        // T^2 (T + 1)
        let f = poly(&f5, &[0, 0, 1, 1]);
        let z = FieldElement::ZERO;
        assert_eq!(newton_coeffs(&f5, &f, &[z, z]), vec![z, z]);
        assert!(divides(&f5, &f, &[z, z]));
        assert!(!newton_coeffs(&f5, &f, &[z, z, z])[2].is_zero());
        assert!(!divides(&f5, &f, &[z, z, z]));
    }

    #[test]
    fn resultant_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        let f7 = make_field(7, 1, None).unwrap();
        let r = resultant(&f5, &poly(&f5, &[1, 0, 1]), &poly(&f5, &[-2, 1])).unwrap();
        assert_eq!(r, FieldElement::ZERO);
        let r = resultant(&f7, &poly(&f7, &[1, 0, 1]), &poly(&f7, &[0, 2])).unwrap();
        assert_eq!(r, f7.element(4));
        let (one, two) = (f7.element(1), f7.element(2));
        let f = UniPoly::from_roots(&f7, &[one, one, two, two]);
        let fp = f.derivative(&f7);
        assert_eq!(resultant(&f7, &f, &fp).unwrap(), FieldElement::ZERO);
        assert_eq!(subres1(&f7, &f, &fp).unwrap(), FieldElement::ZERO);
        // a single double root: subres1 survives
        let g = UniPoly::from_roots(&f7, &[one, one, two, f7.element(3)]);
        let gp = g.derivative(&f7);
        assert_eq!(resultant(&f7, &g, &gp).unwrap(), FieldElement::ZERO);
        assert_ne!(subres1(&f7, &g, &gp).unwrap(), FieldElement::ZERO);
        assert_eq!(resultant(&f7, &UniPoly::zero(), &g), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn discriminant_classics() {
        let f11 = make_field(11, 1, None).unwrap();
        for b in 0..11 {
            for c in 0..11 {
                let f = poly(&f11, &[c, b, 1]);
                assert_eq!(discriminant(&f11, &f).unwrap(), f11.from_int(b * b - 4 * c));
                let g = poly(&f11, &[c, b, 0, 1]);
                let expect = -4 * b * b * b - 27 * c * c;
                assert_eq!(discriminant(&f11, &g).unwrap(), f11.from_int(expect));
            }
        }
        assert_eq!(discriminant(&f11, &poly(&f11, &[0, 0, 1])).unwrap(), FieldElement::ZERO);
        assert_eq!(discriminant(&f11, &poly(&f11, &[0, 0, 2])), Err(PolyError::NonMonic));
        assert_eq!(discriminant(&f11, &poly(&f11, &[3, 1])), Err(PolyError::DegreeTooSmall(1)));
    }

    #[test]
    fn text_round_trip() {
        let f5 = make_field(5, 1, None).unwrap();
        let f = UniPoly::parse(&f5, "3,2,1,1").unwrap();
        assert_eq!(f.degree(), Some(3));
        assert_eq!(f.to_text(), "3,2,1,1");
        assert_eq!(UniPoly::zero().to_text(), "0");
        assert!(UniPoly::parse(&f5, "3,7").is_err());
    }

    #[test]
    fn div_rem_and_gcd() {
        let f7 = make_field(7, 1, None).unwrap();
        let (a, b, c) = (f7.element(1), f7.element(2), f7.element(3));
        let f = UniPoly::from_roots(&f7, &[a, b, c]);
        let g = UniPoly::from_roots(&f7, &[b, c, f7.element(5)]);
        assert_eq!(f.gcd(&f7, &g), UniPoly::from_roots(&f7, &[b, c]));
        let (q, r) = f.div_rem(&f7, &g).unwrap();
        assert_eq!(q.mul(&f7, &g).add(&f7, &r), f);
    }
}
