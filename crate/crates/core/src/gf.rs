//! Arithmetic in `F_q = F_{p^k}` for odd primes `p`.
//!
//! Elements are stored by their canonical index `Σ c_i p^i`, where `c_i` are
//! the coefficients of the polynomial-basis representative modulo the field
//! modulus. Index 0 is the additive identity and index 1 the multiplicative
//! one. Fields with `q <= 4096` carry full addition/multiplication tables.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest field order that gets precomputed operation tables.
pub const TABLE_LIMIT: u32 = 4096;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic must be an odd prime, got {0}")]
    EvenCharacteristic(u64),
    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u64 },
    #[error("modulus must be monic of degree {k} with residues below {p}")]
    MalformedModulus { p: u64, k: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {0} exceeds the supported maximum")]
    TooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field descriptor `{0}`")]
    BadDescriptor(String),
}

/// An element of some [`FieldSpec`], identified by its canonical index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// The field `F_{p^k}` together with its (irreducible, monic) modulus.
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("descriptor", &self.descriptor())
            .field("tables", &self.tables.is_some())
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

/// Validates `(p, k, modulus)` and builds the field. Without a modulus the
/// monic irreducible polynomial of degree `k` with the lowest canonical index
/// (lower coefficients read as base-`p` digits) is chosen.
pub fn make_field(p: u64, k: u32, modulus: Option<&[u64]>) -> Result<FieldSpec, GfError> {
    if p == 2 || !is_prime(p) {
        return Err(GfError::EvenCharacteristic(p));
    }
    if k == 0 {
        return Err(GfError::ZeroDegree);
    }
    let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
    if q > MAX_ORDER as u128 {
        return Err(GfError::TooLarge(q.min(u64::MAX as u128) as u64));
    }
    let modulus: Vec<u64> = match modulus {
        Some(m) => {
            if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&c| c >= p) {
                return Err(GfError::MalformedModulus { p, k });
            }
            if !fp_poly::is_irreducible(m, p) {
                return Err(GfError::ReducibleModulus { p });
            }
            m.to_vec()
        }
        None => search_modulus(p, k),
    };
    let mut field = FieldSpec {
        p: p as u32,
        k,
        q: q as u32,
        modulus: modulus.iter().map(|&c| c as u32).collect(),
        tables: None,
    };
    if field.q <= TABLE_LIMIT {
        field.tables = Some(field.build_tables());
    }
    Ok(field)
}

fn search_modulus(p: u64, k: u32) -> Vec<u64> {
    let lower = p.pow(k);
    for idx in 0..lower {
        let mut m = Vec::with_capacity(k as usize + 1);
        let mut rest = idx;
        for _ in 0..k {
            m.push(rest % p);
            rest /= p;
        }
        m.push(1);
        if fp_poly::is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldSpec {
    /// Prime field `F_p`.
    pub fn prime(p: u64) -> Result<FieldSpec, GfError> {
        make_field(p, 1, None)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Monic modulus, low-to-high.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    /// `"p^k/c_0,...,c_k"`, e.g. `"3^2/1,0,1"` for `T^2 + 1`.
    pub fn descriptor(&self) -> String {
        let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        format!("{}^{}/{}", self.p, self.k, coeffs.join(","))
    }

    pub fn element(&self, index: u32) -> FieldElement {
        assert!(index < self.q, "index {index} out of range for q = {}", self.q);
        FieldElement(index)
    }

    pub fn try_element(&self, index: u64) -> Option<FieldElement> {
        (index < self.q as u64).then_some(FieldElement(index as u32))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p as i64) as u32)
    }

    /// All elements in canonical-index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(FieldElement)
    }

    /// Coefficients (length `k`) of the polynomial-basis representative.
    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.k as usize);
        let mut rest = x.0;
        for _ in 0..self.k {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElement {
        assert!(coeffs.len() <= self.k as usize);
        let mut idx = 0u32;
        for &c in coeffs.iter().rev() {
            idx = idx * self.p + (c % self.p);
        }
        FieldElement(idx)
    }

    #[inline]
    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.add[(x.0 * self.q + y.0) as usize] as u32),
            None => self.add_slow(x, y),
        }
    }

    #[inline]
    pub fn neg(&self, x: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.neg[x.0 as usize] as u32),
            None => self.neg_slow(x),
        }
    }

    #[inline]
    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.mul[(x.0 * self.q + y.0) as usize] as u32),
            None => self.mul_slow(x, y),
        }
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, GfError> {
        if x.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        Ok(match &self.tables {
            Some(t) => FieldElement(t.inv[x.0 as usize] as u32),
            None => self.pow(x, self.q as u64 - 2),
        })
    }

    pub fn div(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: FieldElement, mut e: u64) -> FieldElement {
        let mut base = x;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplication by an integer (repeated addition), reduced mod `p`.
    pub fn mul_int(&self, x: FieldElement, n: u64) -> FieldElement {
        self.mul(x, self.from_int((n % self.p as u64) as i64))
    }

    fn add_slow(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        if self.k == 1 {
            return FieldElement(((x.0 as u64 + y.0 as u64) % self.p as u64) as u32);
        }
        let (a, b) = (self.coeffs(x), self.coeffs(y));
        let sum: Vec<u32> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.from_coeffs(&sum)
    }

    fn neg_slow(&self, x: FieldElement) -> FieldElement {
        let neg: Vec<u32> = self
            .coeffs(x)
            .iter()
            .map(|&c| (self.p - c) % self.p)
            .collect();
        self.from_coeffs(&neg)
    }

    fn mul_slow(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        let p = self.p as u64;
        if self.k == 1 {
            return FieldElement(((x.0 as u64 * y.0 as u64) % p) as u32);
        }
        let k = self.k as usize;
        let (a, b) = (self.coeffs(x), self.coeffs(y));
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &u) in a.iter().enumerate() {
            for (j, &v) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
            }
        }
        for deg in (k..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for (i, &m) in self.modulus[..k].iter().enumerate() {
                let idx = deg - k + i;
                prod[idx] = (prod[idx] + c * (p - m as u64)) % p;
            }
        }
        let out: Vec<u32> = prod[..k].iter().map(|&c| c as u32).collect();
        self.from_coeffs(&out)
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for x in 0..q {
            for y in x..q {
                let (ex, ey) = (FieldElement(x as u32), FieldElement(y as u32));
                let s = self.add_slow(ex, ey).0 as u16;
                let m = self.mul_slow(ex, ey).0 as u16;
                add[x * q + y] = s;
                add[y * q + x] = s;
                mul[x * q + y] = m;
                mul[y * q + x] = m;
            }
        }
        let neg: Vec<u16> = (0..q)
            .map(|x| self.neg_slow(FieldElement(x as u32)).0 as u16)
            .collect();
        let mut inv = vec![0u16; q];
        for x in 1..q {
            if inv[x] != 0 {
                continue;
            }
            for y in 1..q {
                if mul[x * q + y] == 1 {
                    inv[x] = y as u16;
                    inv[y] = x as u16;
                    break;
                }
            }
        }
        Tables { add, mul, neg, inv }
    }
}

impl FromStr for FieldSpec {
    type Err = GfError;

    /// Accepts `"p"`, `"p^k"` or `"p^k/c_0,...,c_k"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GfError::BadDescriptor(s.to_string());
        let s = s.trim();
        let (head, modulus) = match s.split_once('/') {
            Some((h, m)) => (h, Some(m)),
            None => (s, None),
        };
        let (p, k) = match head.split_once('^') {
            Some((p, k)) => (
                p.trim().parse::<u64>().map_err(|_| bad())?,
                k.trim().parse::<u32>().map_err(|_| bad())?,
            ),
            None => (head.trim().parse::<u64>().map_err(|_| bad())?, 1),
        };
        let modulus = match modulus {
            Some(m) => Some(
                m.split(',')
                    .map(|c| c.trim().parse::<u64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        make_field(p, k, modulus.as_deref())
    }
}

/// Dense polynomials over `F_p` with `u64` residues, used for the modulus search.
mod fp_poly {
    fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod(a: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        let mut base = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc
    }

    fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        let lc_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = r[top] * lc_inv % p;
            for (i, &mi) in m.iter().enumerate() {
                let idx = top - dm + i;
                r[idx] = (r[idx] + (p - c) * mi) % p;
            }
            r = trim(r);
        }
        r
    }

    fn mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &u) in a.iter().enumerate() {
            for (j, &v) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % p;
            }
        }
        rem(&prod, m, p)
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin-style test: `f` of degree `k` is irreducible iff
    /// `gcd(f, T^{p^i} - T) = 1` for every `1 <= i <= k/2`.
    pub(super) fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        let k = f.len() - 1;
        if k == 1 {
            return true;
        }
        let x = vec![0u64, 1];
        let mut h = rem(&x, &f, p);
        for _ in 1..=k / 2 {
            // h <- h^p mod f
            let mut acc = vec![1u64];
            let mut base = h.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_mod(&acc, &base, &f, p);
                }
                base = mul_mod(&base, &base, &f, p);
                e >>= 1;
            }
            h = acc;
            let mut diff = h.clone();
            diff.resize(diff.len().max(2), 0);
            diff[1] = (diff[1] + p - 1) % p;
            let g = gcd(&f, &diff, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}
