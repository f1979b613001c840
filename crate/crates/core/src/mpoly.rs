//! Sparse multivariate polynomials over `F_p` and symbolic Sylvester
//! resultants with polynomial entries.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpolyError {
    #[error("division is not exact")]
    InexactDivision,
    #[error("degenerate leading coefficient in T")]
    DegenerateLeadingCoefficient,
}

/// Exponent vector ordered graded-lexicographically (total degree first,
/// then lexicographic with variable 0 most significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    p: u32,
    vars: Arc<[String]>,
    terms: BTreeMap<Monomial, u32>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let (p64, mut base, mut e, mut acc) = (p as u64, a as u64 % p as u64, p as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p64;
        }
        base = base * base % p64;
        e >>= 1;
    }
    acc as u32
}

impl MultiPoly {
    pub fn zero(p: u32, vars: Arc<[String]>) -> Self {
        MultiPoly { p, vars, terms: BTreeMap::new() }
    }

    /// Variables named `B{i}` for each listed index.
    pub fn b_vars(indices: &[usize]) -> Arc<[String]> {
        indices.iter().map(|i| format!("B{i}")).collect::<Vec<_>>().into()
    }

    pub fn constant(p: u32, vars: Arc<[String]>, c: i64) -> Self {
        let mut out = MultiPoly::zero(p, vars);
        let nv = out.vars.len();
        out.add_term(Monomial::one(nv), c.rem_euclid(p as i64) as u32);
        out
    }

    /// The `i`-th variable.
    pub fn var(p: u32, vars: Arc<[String]>, i: usize) -> Self {
        let mut out = MultiPoly::zero(p, vars);
        let mut e = vec![0; out.vars.len()];
        e[i] = 1;
        out.add_term(Monomial(e), 1);
        out
    }

    /// Single term `c · ∏ x_i^{e_i}`.
    pub fn term(p: u32, vars: Arc<[String]>, c: i64, exps: &[u32]) -> Self {
        assert_eq!(exps.len(), vars.len());
        let mut out = MultiPoly::zero(p, vars);
        out.add_term(Monomial(exps.to_vec()), c.rem_euclid(p as i64) as u32);
        out
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u32]) -> u32 {
        self.terms.get(&Monomial(exps.to_vec())).copied().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: u32) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = (*o.get() + c) % self.p;
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_compat(&self, other: &MultiPoly) {
        assert_eq!(self.p, other.p, "mixed characteristics");
        assert_eq!(self.vars.len(), other.vars.len(), "mixed variable arity");
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compat(other);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.p - *c;
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: i64) -> MultiPoly {
        let c = c.rem_euclid(self.p as i64) as u64;
        let mut out = MultiPoly::zero(self.p, self.vars.clone());
        for (m, &a) in &self.terms {
            out.add_term(m.clone(), (a as u64 * c % self.p as u64) as u32);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compat(other);
        let mut out = MultiPoly::zero(self.p, self.vars.clone());
        let p = self.p as u64;
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), (ca as u64 * cb as u64 % p) as u32);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.p, self.vars.clone(), 1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn leading(&self) -> Option<(&Monomial, u32)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    /// Exact quotient `self / divisor`.
    pub fn exact_div(&self, divisor: &MultiPoly) -> Result<MultiPoly, MpolyError> {
        self.check_compat(divisor);
        let Some((lm, lc)) = divisor.leading() else {
            return Err(MpolyError::InexactDivision);
        };
        let (lm, lc_inv) = (lm.clone(), inv_mod(lc, self.p));
        let p = self.p as u64;
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(self.p, self.vars.clone());
        while let Some((rm, rc)) = rem.leading() {
            let t = rm.checked_div(&lm).ok_or(MpolyError::InexactDivision)?;
            let c = (rc as u64 * lc_inv as u64 % p) as u32;
            quot.add_term(t.clone(), c);
            let neg_c = (p - c as u64) % p;
            for (m, &dc) in &divisor.terms {
                rem.add_term(m.mul(&t), (dc as u64 * neg_c % p) as u32);
            }
        }
        Ok(quot)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    /// Evaluation at a point of `F_p^{nvars}` (residues).
    pub fn eval(&self, point: &[u32]) -> u32 {
        assert_eq!(point.len(), self.nvars());
        let p = self.p as u64;
        let mut acc = 0u64;
        for (m, &c) in &self.terms {
            let mut t = c as u64;
            for (&x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t * x as u64 % p;
                }
            }
            acc = (acc + t) % p;
        }
        acc as u32
    }

    /// Substitutes `value` for variable `var`, keeping the arity.
    pub fn specialize(&self, var: usize, value: u32) -> MultiPoly {
        let p = self.p as u64;
        let mut out = MultiPoly::zero(self.p, self.vars.clone());
        for (m, &c) in &self.terms {
            let mut e = m.0.clone();
            let mut t = c as u64;
            for _ in 0..e[var] {
                t = t * value as u64 % p;
            }
            e[var] = 0;
            out.add_term(Monomial(e), t as u32);
        }
        out
    }

    /// `Some(λ)` when `self = λ·other` for a single nonzero `λ ∈ F_p`.
    pub fn scalar_ratio(&self, other: &MultiPoly) -> Option<u32> {
        self.check_compat(other);
        if self.terms.len() != other.terms.len() || self.is_zero() {
            return None;
        }
        let (m0, c0) = other.leading()?;
        let lambda = (self.terms.get(m0)?.to_owned() as u64 * inv_mod(c0, self.p) as u64
            % self.p as u64) as u32;
        (self.clone() == other.scale(lambda as i64)).then_some(lambda)
    }

    /// Canonical rendering, terms in descending graded-lex order.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, &c)| {
                let mut factors = Vec::new();
                for (name, &e) in self.vars.iter().zip(&m.0) {
                    match e {
                        0 => {}
                        1 => factors.push(name.clone()),
                        _ => factors.push(format!("{name}^{e}")),
                    }
                }
                match (c, factors.is_empty()) {
                    (_, true) => c.to_string(),
                    (1, false) => factors.join("*"),
                    _ => format!("{c}*{}", factors.join("*")),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Positive per-variable weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSystem {
    pub weights: Vec<u32>,
}

impl WeightSystem {
    pub fn new(weights: Vec<u32>) -> Self {
        assert!(weights.iter().all(|&w| w > 0), "weights must be positive");
        WeightSystem { weights }
    }

    /// `wt(B_j) = d − j` for the listed variable indices.
    pub fn appendix(d: u32, indices: &[usize]) -> Self {
        WeightSystem::new(indices.iter().map(|&j| d - j as u32).collect())
    }

    pub fn weight(&self, m: &Monomial) -> u64 {
        m.0.iter().zip(&self.weights).map(|(&e, &w)| e as u64 * w as u64).sum()
    }
}

/// Splits `f` into weighted-homogeneous components keyed by weight.
pub fn weight_decompose(f: &MultiPoly, w: &WeightSystem) -> BTreeMap<u64, MultiPoly> {
    assert_eq!(w.weights.len(), f.nvars());
    let mut out: BTreeMap<u64, MultiPoly> = BTreeMap::new();
    for (m, &c) in &f.terms {
        out.entry(w.weight(m))
            .or_insert_with(|| MultiPoly::zero(f.p, f.vars.clone()))
            .add_term(m.clone(), c);
    }
    out
}

/// Determinant by fraction-free (Bareiss) elimination, pivoting on the entry
/// with the fewest terms.
pub fn det_bareiss(m: &[Vec<MultiPoly>], p: u32, vars: Arc<[String]>) -> Result<MultiPoly, MpolyError> {
    let n = m.len();
    let one = MultiPoly::constant(p, vars.clone(), 1);
    if n == 0 {
        return Ok(one);
    }
    let mut a = m.to_vec();
    let mut prev = one;
    let mut negate = false;
    for k in 0..n - 1 {
        let pivot = (k..n)
            .filter(|&r| !a[r][k].is_zero())
            .min_by_key(|&r| a[r][k].len());
        let Some(pivot) = pivot else {
            return Ok(MultiPoly::zero(p, vars));
        };
        if pivot != k {
            a.swap(pivot, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.exact_div(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if negate { d.neg() } else { d })
}

/// Determinant by cofactor expansion along the first row.
pub fn det_minors(m: &[Vec<MultiPoly>], p: u32, vars: Arc<[String]>) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::constant(p, vars, 1);
    }
    let mut acc = MultiPoly::zero(p, vars.clone());
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != col)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = m[0][col].mul(&det_minors(&minor, p, vars.clone()));
        acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Bareiss determinant; cofactor expansion stands in for matrices of
/// dimension at most 6 if an intermediate division fails.
pub fn determinant(m: &[Vec<MultiPoly>], p: u32, vars: Arc<[String]>) -> Result<MultiPoly, MpolyError> {
    match det_bareiss(m, p, vars.clone()) {
        Ok(d) => Ok(d),
        Err(_) if m.len() <= 6 => Ok(det_minors(m, p, vars)),
        Err(e) => Err(e),
    }
}

fn check_t_polys(f: &[MultiPoly], g: &[MultiPoly]) -> Result<(u32, Arc<[String]>), MpolyError> {
    if f.len() < 2 || g.len() < 2 {
        return Err(MpolyError::DegenerateLeadingCoefficient);
    }
    if f.last().is_some_and(MultiPoly::is_zero) || g.iter().all(MultiPoly::is_zero) {
        return Err(MpolyError::DegenerateLeadingCoefficient);
    }
    Ok((f[0].p, f[0].vars.clone()))
}

fn symbolic_psc(f: &[MultiPoly], g: &[MultiPoly], j: usize) -> Result<MultiPoly, MpolyError> {
    let (p, vars) = check_t_polys(f, g)?;
    let zero = MultiPoly::zero(p, vars.clone());
    match linalg::sylvester_minor(f, g, j, &zero) {
        Some(m) => determinant(&m, p, vars),
        None => Ok(zero),
    }
}

/// Sylvester resultant in `T` of polynomials given by low-to-high
/// `MultiPoly` coefficients. Formal degrees are the slice lengths minus one;
/// `f` needs a nonzero leading coefficient, `g` may have a vanishing one.
pub fn symbolic_resultant(f: &[MultiPoly], g: &[MultiPoly]) -> Result<MultiPoly, MpolyError> {
    symbolic_psc(f, g, 0)
}

/// Principal coefficient of the order-1 subresultant, same layout as
/// [`symbolic_resultant`].
pub fn symbolic_subres1(f: &[MultiPoly], g: &[MultiPoly]) -> Result<MultiPoly, MpolyError> {
    symbolic_psc(f, g, 1)
}
