//! One exhaustive pass over a family, collecting every profile-derived sum.
//!
//! Per member `b` only the value histogram `hist[N] = #{c : N_b(c) = N}` and,
//! optionally, the root multiplicities of `f_b − c` are needed. Chunks of the
//! lexicographic `b`-range are reduced in parallel with `u128` accumulators
//! and merged into arbitrary-precision totals, so results do not depend on
//! chunking or worker count.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::family::{b_chunks, FamilySpec};
use crate::gf::{FieldElement, FieldSpec};

pub const DEFAULT_CHUNK: u64 = 512;

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    /// Also count ordered root tuples with multiplicity (closed Γ* counts).
    pub multiplicities: bool,
    pub chunk: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { multiplicities: false, chunk: DEFAULT_CHUNK }
    }
}

/// Totals over all members of a family. Index vectors run over `0..=d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanTotals {
    pub d: usize,
    pub members: u64,
    /// `Σ_b V(f_b)`.
    pub sum_v: BigUint,
    /// `Σ_b V(f_b)²`.
    pub sum_v2: BigUint,
    /// `binom[r] = Σ_b Σ_c C(N_b(c), r)`.
    pub binom: Vec<BigUint>,
    /// `smn[m][n] = Σ_b Σ_{c₁ ≠ c₂} C(N_b(c₁), m)·C(N_b(c₂), n)`.
    pub smn: Vec<Vec<BigUint>>,
    /// `gamma_star[r] = Σ_b Σ_c #{ordered r-tuples dividing f_b − c}`.
    pub gamma_star: Option<Vec<BigUint>>,
    /// `gamma_star_mn[m][n] = Σ_b G_m(b)·G_n(b)` with `G_r(b) = Σ_c` of the above.
    pub gamma_star_mn: Option<Vec<Vec<BigUint>>>,
}

/// Per-chunk sums. `h1[k] = Σ_b hist_b[k]` and `h2[k][l] = Σ_b hist_b[k]·hist_b[l]`
/// determine every histogram statistic; the closed counts need `g` per member.
struct Acc {
    members: u64,
    h1: Vec<u128>,
    h2: Vec<Vec<u128>>,
    gstar: Vec<u128>,
    gstar_mn: Vec<Vec<u128>>,
}

impl Acc {
    fn new(d: usize) -> Self {
        Acc {
            members: 0,
            h1: vec![0; d + 1],
            h2: vec![vec![0; d + 1]; d + 1],
            gstar: vec![0; d + 1],
            gstar_mn: vec![vec![0; d + 1]; d + 1],
        }
    }
}

fn binomial_table(d: usize) -> Vec<Vec<u128>> {
    let mut c = vec![vec![0u128; d + 1]; d + 1];
    for n in 0..=d {
        c[n][0] = 1;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1] + if k <= n - 1 { c[n - 1][k] } else { 0 };
        }
    }
    c
}

/// Ordered `r`-tuples drawn from a multiset of roots with the given
/// multiplicities, for every `r ≤ d`: `Σ r!/∏ m_α!` over `m_α ≤ mult_α`.
pub fn ordered_tuple_counts(mults: &[u32], d: usize) -> Vec<u128> {
    let c = binomial_table(d);
    let mut w = vec![0u128; d + 1];
    w[0] = 1;
    for &mu in mults {
        let mut next = vec![0u128; d + 1];
        for r in 0..=d {
            for k in 0..=(mu as usize).min(r) {
                next[r] += c[r][k] * w[r - k];
            }
        }
        w = next;
    }
    w
}

struct Worker<'a> {
    field: &'a FieldSpec,
    spec: &'a FamilySpec,
    d: usize,
    falling: Vec<Vec<u128>>,
    counts: Vec<u32>,
    vals: Vec<FieldElement>,
    special: Vec<bool>,
    mult: Vec<u32>,
    taylor: Vec<FieldElement>,
}

impl<'a> Worker<'a> {
    fn new(spec: &'a FamilySpec) -> Self {
        let d = spec.d();
        let q = spec.q() as usize;
        let mut falling = vec![vec![0u128; d + 1]; d + 1];
        for n in 0..=d {
            let mut f = 1u128;
            for r in 0..=d {
                falling[n][r] = f;
                f *= n.saturating_sub(r) as u128;
            }
        }
        Worker {
            field: spec.field(),
            spec,
            d,
            falling,
            counts: vec![0; q],
            vals: vec![FieldElement::ZERO; q],
            special: vec![false; q],
            mult: vec![1; q],
            taylor: vec![FieldElement::ZERO; d + 1],
        }
    }

    #[inline]
    fn horner(field: &FieldSpec, coeffs: &[FieldElement], t: FieldElement) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        for &c in coeffs.iter().rev() {
            acc = field.add(field.mul(acc, t), c);
        }
        acc
    }

    /// Multiplicity of `t` as a root of `f − f(t)`.
    fn multiplicity(&mut self, coeffs: &[FieldElement], t: FieldElement, value: FieldElement) -> u32 {
        let field = self.field;
        self.taylor.copy_from_slice(coeffs);
        self.taylor[0] = field.sub(self.taylor[0], value);
        let mut len = self.taylor.len();
        let mut mult = 0;
        while len > 1 {
            // synthetic division in place: high-to-low carries
            let mut carry = FieldElement::ZERO;
            for i in (0..len).rev() {
                carry = field.add(field.mul(carry, t), self.taylor[i]);
                self.taylor[i] = carry;
            }
            if !self.taylor[0].is_zero() {
                break;
            }
            mult += 1;
            self.taylor.copy_within(1..len, 0);
            len -= 1;
        }
        mult
    }

    fn run(&mut self, range: std::ops::Range<u64>, multiplicities: bool) -> Acc {
        let d = self.d;
        let field = self.field;
        let q = field.q();
        let len = self.spec.free_len();
        let mut acc = Acc::new(d);
        let mut deriv = vec![FieldElement::ZERO; d];
        let mut hist = vec![0u128; d + 1];
        let mut nonzero = Vec::with_capacity(d + 1);
        if range.is_empty() {
            return acc;
        }
        let b = self.spec.b_at(range.start);
        let mut coeffs = self.spec.coeffs(&b, FieldElement::ZERO).expect("length matches");
        // coeffs[1] is the least significant digit of the enumeration
        let mut digits: Vec<u32> = (0..=len).map(|j| coeffs[j].index()).collect();
        for step in 0..range.end - range.start {
            if step > 0 {
                for j in 1..=len {
                    digits[j] += 1;
                    if digits[j] < q {
                        coeffs[j] = field.element(digits[j]);
                        break;
                    }
                    digits[j] = 0;
                    coeffs[j] = FieldElement::ZERO;
                }
            }
            self.counts.iter_mut().for_each(|c| *c = 0);
            for t in field.elements() {
                let v = Self::horner(field, &coeffs, t);
                self.vals[t.index() as usize] = v;
                self.counts[v.index() as usize] += 1;
            }
            hist.iter_mut().for_each(|h| *h = 0);
            for &n in &self.counts {
                hist[n as usize] += 1;
            }
            nonzero.clear();
            nonzero.extend((0..=d).filter(|&k| hist[k] != 0));
            acc.members += 1;
            for &k in &nonzero {
                acc.h1[k] += hist[k];
                for &l in &nonzero {
                    acc.h2[k][l] += hist[k] * hist[l];
                }
            }
            if multiplicities {
                let g = self.closed_counts(&coeffs, &mut deriv, &hist);
                for r in 0..=d {
                    acc.gstar[r] += g[r];
                }
                for m in 1..=d {
                    for n in 1..=d {
                        acc.gstar_mn[m][n] += g[m] * g[n];
                    }
                }
            }
        }
        acc
    }

    /// `G_r(b) = Σ_c` ordered `r`-tuples dividing `f_b − c`.
    fn closed_counts(&mut self, coeffs: &[FieldElement], deriv: &mut [FieldElement], hist: &[u128]) -> Vec<u128> {
        let d = self.d;
        let field = self.field;
        for i in 1..coeffs.len() {
            deriv[i - 1] = field.mul_int(coeffs[i], i as u64);
        }
        let mut g: Vec<u128> = (0..=d)
            .map(|r| (0..=d).map(|n| hist[n] * self.falling[n][r]).sum())
            .collect();
        let mut specials = Vec::new();
        for t in field.elements() {
            let ti = t.index() as usize;
            if Self::horner(field, deriv, t).is_zero() {
                let v = self.vals[ti];
                self.mult[ti] = self.multiplicity(coeffs, t, v);
                if !self.special[v.index() as usize] {
                    self.special[v.index() as usize] = true;
                    specials.push(v);
                }
            }
        }
        for &c in &specials {
            let n = self.counts[c.index() as usize] as usize;
            let mults: Vec<u32> = field
                .elements()
                .filter(|t| self.vals[t.index() as usize] == c)
                .map(|t| self.mult[t.index() as usize])
                .collect();
            let w = ordered_tuple_counts(&mults, d);
            for r in 0..=d {
                g[r] = g[r] - self.falling[n][r] + w[r];
            }
        }
        for &c in &specials {
            self.special[c.index() as usize] = false;
        }
        for t in field.elements() {
            self.mult[t.index() as usize] = 1;
        }
        g
    }
}

fn merge(mut x: Acc, y: Acc) -> Acc {
    x.members += y.members;
    for (a, b) in x.h1.iter_mut().zip(&y.h1) {
        *a += b;
    }
    for (ra, rb) in x.h2.iter_mut().zip(&y.h2) {
        for (a, b) in ra.iter_mut().zip(rb) {
            *a += b;
        }
    }
    for (a, b) in x.gstar.iter_mut().zip(&y.gstar) {
        *a += b;
    }
    for (ra, rb) in x.gstar_mn.iter_mut().zip(&y.gstar_mn) {
        for (a, b) in ra.iter_mut().zip(rb) {
            *a += b;
        }
    }
    x
}

fn big(v: &[u128]) -> Vec<BigUint> {
    v.iter().map(|&x| BigUint::from(x)).collect()
}

/// Runs the pass on the current rayon pool.
pub fn scan(spec: &FamilySpec, opts: ScanOptions) -> ScanTotals {
    let d = spec.d();
    let q = spec.q() as u128;
    let acc = b_chunks(spec, opts.chunk)
        .into_par_iter()
        .map(|range| Worker::new(spec).run(range, opts.multiplicities))
        .reduce(|| Acc::new(d), merge);
    let c = binomial_table(d);
    let members = acc.members as u128;
    // V = q − hist[0]
    let sum_v = members * q - acc.h1[0];
    let sum_v2 = members * q * q - 2 * q * acc.h1[0] + acc.h2[0][0];
    let binom: Vec<u128> = (0..=d).map(|r| (0..=d).map(|k| acc.h1[k] * c[k][r]).sum()).collect();
    let mut smn = vec![vec![0u128; d + 1]; d + 1];
    for m in 1..=d {
        for n in 1..=d {
            let mut cross = 0u128;
            for k in m..=d {
                for l in n..=d {
                    cross += acc.h2[k][l] * c[k][m] * c[l][n];
                }
            }
            let diag: u128 = (m.max(n)..=d).map(|k| acc.h1[k] * c[k][m] * c[k][n]).sum();
            smn[m][n] = cross - diag;
        }
    }
    ScanTotals {
        d,
        members: acc.members,
        sum_v: sum_v.into(),
        sum_v2: sum_v2.into(),
        binom: big(&binom),
        smn: smn.iter().map(|r| big(r)).collect(),
        gamma_star: opts.multiplicities.then(|| big(&acc.gstar)),
        gamma_star_mn: opts
            .multiplicities
            .then(|| acc.gstar_mn.iter().map(|r| big(r)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{enumerate_b, family_poly, value_profile};
    use crate::gf::make_field;
    use crate::upoly::root_profile;
    use std::sync::Arc;

    #[test]
    fn tuple_counts_small() {
        // roots {α, β} simple: ordered r-tuples of distinct elements
        assert_eq!(ordered_tuple_counts(&[1, 1], 3), vec![1, 2, 2, 0]);
        // α double: (α), (α,α)
        assert_eq!(ordered_tuple_counts(&[2], 3), vec![1, 1, 1, 0]);
        // α double, β simple: r=3 → 3!/(2!1!) = 3
        assert_eq!(ordered_tuple_counts(&[2, 1], 3), vec![1, 2, 3, 3]);
    }

    #[test]
    fn scan_matches_naive() {
        let f5 = Arc::new(make_field(5, 1, None).unwrap());
        let spec = FamilySpec::new(f5.clone(), 4, 1, vec![f5.element(2)]).unwrap();
        let totals = scan(&spec, ScanOptions { multiplicities: true, chunk: 3 });
        let mut sum_v = 0u64;
        let mut gstar = vec![0u64; 5];
        for b in enumerate_b(&spec) {
            sum_v += value_profile(&spec, &b).unwrap().value_set_size() as u64;
            for c in f5.elements() {
                let f = family_poly(&spec, &b, f5.neg(c)).unwrap();
                let mults: Vec<u32> = root_profile(&f5, &f).unwrap().roots.values().copied().collect();
                for (r, w) in ordered_tuple_counts(&mults, 4).into_iter().enumerate() {
                    gstar[r] += w as u64;
                }
            }
        }
        assert_eq!(totals.sum_v, BigUint::from(sum_v));
        let expect: Vec<BigUint> = gstar.into_iter().map(BigUint::from).collect();
        assert_eq!(totals.gamma_star.unwrap(), expect);
        assert_eq!(totals.members, 25);
    }

    #[test]
    fn chunking_invariance() {
        let f7 = Arc::new(make_field(7, 1, None).unwrap());
        let spec = FamilySpec::new(f7.clone(), 4, 1, vec![f7.element(1)]).unwrap();
        let a = scan(&spec, ScanOptions { multiplicities: true, chunk: 1 });
        let b = scan(&spec, ScanOptions { multiplicities: true, chunk: 1000 });
        assert_eq!(a, b);
    }
}
