//! Acceptance suite. Each test prints one `criterion NN: PASS|FAIL` line.

use std::sync::Arc;
use std::time::Instant;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vslab::appendix::{appendix_case_check, generic_disc, subres1_terms_check, CaseTag};
use vslab::bounds::{applicability, bound_suite_from_scan, unimodality_audit, Shape};
use vslab::counting::{
    chi_r, gamma_counts_mn, gamma_counts_r, linear_system_audit, linear_system_brute, s_mn, ChiMethod, SMatrix,
    SmnMethod, DEFAULT_BUDGET,
};
use vslab::family::{enumerate_b, family_poly, FamilySpec};
use vslab::gf::{make_field, FieldElement, FieldSpec};
use vslab::moments::{
    cohen_exact_mean, mu, one_minus_inv_e_enclosure, reconstruct_second_moment, value_set_mean, Mode, MomentReport,
};
use vslab::mpoly::{weight_decompose, WeightSystem};
use vslab::report::rat;
use vslab::scan::{scan, ScanOptions};
use vslab::upoly::{divides, root_profile};

fn field(q: u64) -> Arc<FieldSpec> {
    let (p, k) = match q {
        25 => (5, 2),
        27 => (3, 3),
        _ => (q, 1),
    };
    Arc::new(make_field(p, k, None).unwrap())
}

fn spec(q: u64, d: usize, s: usize, a: &[u32]) -> FamilySpec {
    let f = field(q);
    let a = a.iter().map(|&i| f.element(i)).collect();
    FamilySpec::new_strict(f, d, s, a).unwrap()
}

/// Every `a ∈ F_q^s` as index vectors.
fn all_a(q: u32, s: usize) -> Vec<Vec<u32>> {
    if s == 0 {
        return vec![vec![]];
    }
    (0..s).map(|_| 0..q).multi_cartesian_product().collect()
}

fn verdict(n: u32, title: &str, failures: &[String], started: Instant) {
    let tag = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {n:02}: {tag} {title} ({:.1?})", started.elapsed());
    for f in failures {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {n} failed: {failures:?}");
}

#[test]
fn criterion_01_cohen_identity() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (q, d) in [(5, 3), (5, 4), (7, 3), (7, 5), (11, 4), (13, 5)] {
        let got = value_set_mean(&spec(q, d, 0, &[]));
        let want = cohen_exact_mean(q, d);
        if got != want {
            bad.push(format!("(q, d) = ({q}, {d}): {} vs {}", rat(&got), rat(&want)));
        }
    }
    verdict(1, "brute-force V(d,0) equals the closed alternating sum", &bad, t);
}

#[test]
fn criterion_02_mean_reconstruction() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut checked = 0;
    for (q, d, s) in [(5, 4, 1), (5, 4, 2), (7, 4, 1), (7, 5, 2), (7, 5, 3)] {
        for a in all_a(q as u32, s) {
            let sp = spec(q, d, s, &a);
            let report = MomentReport::compute(&sp);
            checked += 1;
            if report.mean_identity_holds() != Some(true) {
                bad.push(format!("{}: mean {} reconstructed {:?}", sp.key(), rat(&report.mean), report.mean_reconstructed));
            }
        }
    }
    verdict(2, &format!("mean equals its chi reconstruction on {checked} families"), &bad, t);
}

#[test]
fn criterion_03_chi_dual_method() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (q, d, s, a) in [(5, 3, 1, vec![1]), (7, 4, 1, vec![1]), (7, 4, 2, vec![1, 2])] {
        let sp = spec(q, d, s, &a);
        for r in d - s + 1..=d {
            let profile = chi_r(&sp, r, ChiMethod::Profile, DEFAULT_BUDGET).unwrap();
            let subsets = chi_r(&sp, r, ChiMethod::Subsets, DEFAULT_BUDGET).unwrap();
            if profile != subsets {
                bad.push(format!("{} r = {r}: profile {profile} subsets {subsets}", sp.key()));
            }
        }
    }
    verdict(3, "chi by value profiles equals chi by subset interpolation", &bad, t);
}

#[test]
fn criterion_04_second_moment_reconstruction() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (q, d, s) in [(5, 4, 1), (5, 4, 0), (7, 4, 1), (7, 5, 0)] {
        let choices: Vec<Vec<u32>> = if s == 0 { vec![vec![]] } else { (0..3).map(|i| vec![i]).collect() };
        for a in choices {
            let sp = spec(q, d, s, &a);
            let report = MomentReport::compute(&sp);
            let exact = reconstruct_second_moment(&sp, &report.mean, &report.s_matrix, Mode::Exact).unwrap();
            if exact != report.second_moment {
                bad.push(format!("{}: V2 {} exact-mode {}", sp.key(), rat(&report.second_moment), rat(&exact)));
            }
            println!(
                "    {}: V2 = {}, paper-mode residual = {}",
                sp.key(),
                rat(&report.second_moment),
                rat(&report.paper_residual())
            );
        }
    }
    verdict(4, "second moment equals its exact-mode reconstruction", &bad, t);
}

#[test]
fn criterion_05_smn_dual_method() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let sp = spec(5, 3, 1, &[1]);
    let table = SMatrix::from_scan(&scan(&sp, ScanOptions::default()));
    for m in 1..=3 {
        for n in 1..=3 {
            let profile = s_mn(&sp, m, n, SmnMethod::Profile, DEFAULT_BUDGET).unwrap();
            let brute = s_mn(&sp, m, n, SmnMethod::Brute, DEFAULT_BUDGET).unwrap();
            if profile != brute {
                bad.push(format!("(m, n) = ({m}, {n}): profile {profile} brute {brute}"));
            }
            if table.get(m, n) != table.get(n, m) {
                bad.push(format!("asymmetric at ({m}, {n})"));
            }
        }
    }
    verdict(5, "S_mn by profiles equals S_mn by subset pairs, and is symmetric", &bad, t);
}

#[test]
fn criterion_06_linear_audit() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (q, d, s) in [(5u64, 4usize, 1usize), (7, 5, 1)] {
        let f = field(q);
        let elems: Vec<FieldElement> = f.elements().collect();
        for _ in 0..50 {
            let a = vec![*elems.choose(&mut rng).unwrap()];
            let sp = FamilySpec::new_strict(f.clone(), d, s, a).unwrap();
            let total = rand::Rng::gen_range(&mut rng, 2..=d - s);
            let m = rand::Rng::gen_range(&mut rng, 1..total);
            let n = total - m;
            let picked: Vec<FieldElement> = elems.choose_multiple(&mut rng, total).copied().collect();
            let (g1, g2) = picked.split_at(m);
            let audit = linear_system_audit(&sp, g1, g2).unwrap();
            let want = num_traits::pow(BigUint::from(q), d - s + 1 - total);
            let (all, strict) = linear_system_brute(&sp, g1, g2, DEFAULT_BUDGET).unwrap();
            if audit.rank != total || audit.count_all != want || all != want || strict != audit.count_strict {
                bad.push(format!(
                    "{} m = {m} n = {n}: rank {} count {} brute {all}/{strict}",
                    sp.key(),
                    audit.rank,
                    audit.count_all
                ));
            }
        }
    }
    verdict(6, "Vandermonde systems have full rank and q^(d-s+1-m-n) solutions", &bad, t);
}

#[test]
fn criterion_07_gamma_counts() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let fact = |n: usize| -> BigUint { (1..=n).map(BigUint::from).product() };
    for (q, d, s, a) in [(5, 3, 1, vec![1]), (7, 4, 1, vec![1]), (7, 4, 2, vec![1, 2])] {
        let sp = spec(q, d, s, &a);
        for r in d - s + 1..=d {
            let chi = chi_r(&sp, r, ChiMethod::Subsets, DEFAULT_BUDGET).unwrap();
            let g = gamma_counts_r(&sp, r).unwrap();
            if g.affine_open != fact(r) * chi {
                bad.push(format!("{} r = {r}: |Gamma_r| = {}", sp.key(), g.affine_open));
            }
        }
        let g1 = gamma_counts_r(&sp, 1).unwrap();
        if g1.closed != num_traits::pow(BigUint::from(q), d - s) {
            bad.push(format!("{}: |Gamma_1*| = {}", sp.key(), g1.closed));
        }
    }
    let sp = spec(5, 3, 1, &[1]);
    for m in 1..=3 {
        for n in 1..=3 {
            let smn = s_mn(&sp, m, n, SmnMethod::Brute, DEFAULT_BUDGET).unwrap();
            let g = gamma_counts_mn(&sp, m, n).unwrap();
            if g.affine_open != fact(m) * fact(n) * smn {
                bad.push(format!("(m, n) = ({m}, {n}): |Gamma_mn| = {}", g.affine_open));
            }
        }
    }
    verdict(7, "Gamma point counts match r! chi_r, m!n! S_mn and q^(d-s)", &bad, t);
}

#[test]
fn criterion_08_divisibility_oracle() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut cases = 0u64;
    let f = field(5);
    let elems: Vec<FieldElement> = f.elements().collect();
    for a in 0..5 {
        let sp = spec(5, 4, 1, &[a]);
        for b in enumerate_b(&sp) {
            for &b0 in &elems {
                let poly = family_poly(&sp, &b, b0).unwrap();
                let profile = root_profile(&f, &poly).unwrap();
                for r in 1..=3 {
                    for alpha in std::iter::repeat(elems.iter().copied()).take(r).multi_cartesian_product() {
                        cases += 1;
                        let by_newton = divides(&f, &poly, &alpha);
                        let by_profile = vslab::counting::within_multiplicities(&profile, &alpha);
                        if by_newton != by_profile {
                            bad.push(format!("{} b = {b:?} b0 = {b0} alpha = {alpha:?}", sp.key()));
                        }
                    }
                }
            }
        }
    }
    verdict(8, &format!("divided differences agree with root multiplicities on {cases} cases"), &bad, t);
}

/// Largest `q^{d−s}` scanned for non-maximal `s`.
const SWEEP_CAP: u64 = 20_000_000;

#[test]
fn criterion_09_bound_suite() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let (mut checks, mut instances) = (0usize, 0usize);
    let mut skipped = Vec::new();
    for q in [7u64, 11, 13, 25, 27] {
        let f = field(q);
        let p = f.p() as u64;
        for d in 5..=9usize {
            let applicable: Vec<usize> = (0..=d - 2).filter(|&s| applicability(q, d, s, p).any()).collect();
            let Some(&s_max) = applicable.iter().max() else { continue };
            for &s in &applicable {
                let size = (q as u128).pow((d - s) as u32);
                if s != s_max && size > SWEEP_CAP as u128 {
                    skipped.push(format!("(q, d, s) = ({q}, {d}, {s})"));
                    continue;
                }
                let a: Vec<u32> = (1..=s as u32).map(|i| i % q as u32).collect();
                let sp = spec(q, d, s, &a);
                let totals = scan(&sp, ScanOptions { multiplicities: true, ..Default::default() });
                instances += 1;
                for c in bound_suite_from_scan(&sp, &totals) {
                    if let Some(pass) = c.pass {
                        checks += 1;
                        if !pass {
                            bad.push(format!(
                                "{} {} r={:?} m={:?} n={:?}: lhs {} rhs {:e}",
                                sp.key(),
                                c.kind,
                                c.r,
                                c.m,
                                c.n,
                                rat(&c.lhs),
                                c.rhs
                            ));
                        }
                    }
                }
            }
        }
    }
    println!("    {checks} applicable checks on {instances} families; skipped by size: {}", skipped.join(", "));
    verdict(9, "exact deviations stay below the bound right-hand sides", &bad, t);
}

#[test]
fn criterion_10_unimodality() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for d in 2..=60 {
        let audit = unimodality_audit(d);
        if audit.classification == Shape::Other || !audit.floor_k0_is_max {
            bad.push(format!("d = {d}: {:?}, argmax {:?}, floor k0 {}", audit.classification, audit.argmax, audit.floor_k0));
        }
    }
    let five = unimodality_audit(5);
    let h: Vec<u64> = five.h.iter().map(|x| x.try_into().unwrap()).collect();
    if h != [120, 600, 600, 200, 25] || five.argmax != [1, 2] || five.floor_k0 != 2 {
        bad.push(format!("d = 5: h {h:?} argmax {:?} floor k0 {}", five.argmax, five.floor_k0));
    }
    verdict(10, "h is increasing or unimodal with its maximum at floor(k0)", &bad, t);
}

#[test]
fn criterion_11_appendix_formulas() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let disc_cases = [(7, 4), (5, 5), (3, 6), (3, 4), (5, 6), (3, 7)];
    let subres_cases = [(5, 3), (7, 4), (3, 3), (5, 5)];
    for (p, d) in disc_cases {
        let r = appendix_case_check(p, d).unwrap();
        println!(
            "    disc ({p}, {d}) [{}]: {:?} scalar {:?}, deg_B0 {:?}",
            r.case, r.matched, r.scalar, r.deg_b0
        );
        if !r.matched.passed() {
            bad.push(format!("disc ({p}, {d}) [{}]: computed {} target {}", r.case, r.computed, r.target));
        }
        if let Some((alt, m)) = &r.diagnostic {
            println!("    disc ({p}, {d}) weight-consistent alternative {alt}: {m:?}");
        }
        if r.deg_b0 != Some(d as u32 - 1) {
            bad.push(format!("disc ({p}, {d}) [{}]: deg_B0 = {:?}", r.case, r.deg_b0));
        }
    }
    for (p, d) in subres_cases {
        let r = subres1_terms_check(p, d).unwrap();
        println!("    subres1 ({p}, {d}): {:?} coefficient {:?}, deg_B0 {:?}", r.matched, r.scalar, r.deg_b0);
        if !r.matched.passed() {
            bad.push(format!("subres1 ({p}, {d}): S1 = {} target {}", r.computed, r.target));
        }
        if r.deg_b0 != Some(d as u32 - 1) {
            bad.push(format!("subres1 ({p}, {d}) [{}]: deg_B0 = {:?}", CaseTag::of(p, d), r.deg_b0));
        }
    }
    for (p, d) in [(7u32, 4usize), (5, 5)] {
        let disc = generic_disc(p, d, &(0..d).collect::<Vec<_>>()).unwrap();
        let w = WeightSystem::appendix(d as u32, &(0..d).collect::<Vec<_>>());
        let weights: Vec<u64> = weight_decompose(&disc, &w).into_keys().collect();
        if weights != [(d * (d - 1)) as u64] {
            bad.push(format!("generic disc ({p}, {d}) weights {weights:?}"));
        }
    }
    verdict(11, "discriminant and subresultant closed forms", &bad, t);
}

#[test]
fn criterion_12_mu_convergence() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let (lo, hi) = one_minus_inv_e_enclosure(50);
    if hi.clone() - lo.clone() > BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), 50)) || lo > hi {
        bad.push("enclosure too wide".into());
    }
    let mut fact = BigInt::one();
    for d in 1..=20usize {
        fact *= BigInt::from(d + 1);
        let tail = BigRational::new(BigInt::one(), fact.clone());
        let m = mu(d);
        let worst = (m.clone() - &lo).abs().max((m.clone() - &hi).abs());
        if worst > tail {
            bad.push(format!("d = {d}: |mu_d - (1 - 1/e)| up to {}", rat(&worst)));
        }
    }
    verdict(12, "mu_d is within 1/(d+1)! of 1 - 1/e", &bad, t);
}
