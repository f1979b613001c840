//! One function per subcommand. Each returns its rows and the failing
//! instances, if any.

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vslab::appendix::{appendix_case_check, subres1_terms_check, AppendixReport};
use vslab::bounds::bound_suite_from_scan;
use vslab::counting::{
    chi_r, gamma_counts_mn, gamma_counts_r, gamma_mn_from_scan, gamma_r_from_scan, linear_system_audit,
    linear_system_brute, s_mn, ChiMethod, ChiVector, CountingError, SmnMethod,
};
use vslab::family::FamilySpec;
use vslab::gf::FieldElement;
use vslab::moments::{reconstruct_mean, reconstruct_second_moment, Mode, MomentReport};
use vslab::report::rat;
use vslab::scan::{scan, ScanOptions};

use crate::settings::Settings;
use crate::CliError;

pub struct Outcome<T> {
    pub rows: Vec<T>,
    pub failures: Vec<String>,
}

impl<T> Outcome<T> {
    fn ok(rows: Vec<T>) -> Self {
        Outcome { rows, failures: Vec::new() }
    }
}

/// Budget overruns and regime violations are configuration errors.
fn counting(e: CountingError) -> CliError {
    CliError::Usage(e.to_string())
}

fn a_text(spec: &FamilySpec) -> String {
    spec.a().iter().map(|x| x.index().to_string()).join(" ")
}

fn chi_text(chi: &ChiVector) -> String {
    chi.0.iter().map(|(r, c)| format!("{r}:{c}")).join(" ")
}

#[derive(Serialize)]
pub struct MeanRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    mean: String,
    mu_d_q: String,
    residual: String,
    reconstructed: Option<String>,
    identity: Option<bool>,
}

pub fn mean(st: &Settings) -> Result<Outcome<MeanRow>, CliError> {
    let rows = st
        .families()?
        .iter()
        .map(|spec| {
            let r = MomentReport::compute(spec);
            MeanRow {
                seed: st.seed,
                key: r.key.clone(),
                q: r.q,
                d: r.d,
                s: r.s,
                mean: rat(&r.mean),
                mu_d_q: rat(&r.mean_main_term()),
                residual: rat(&r.mean_residual()),
                reconstructed: r.mean_reconstructed.as_ref().map(rat),
                identity: r.mean_identity_holds(),
            }
        })
        .collect();
    Ok(Outcome::ok(rows))
}

#[derive(Serialize)]
pub struct SecondMomentRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    mean: String,
    mu_d_q: String,
    residual: String,
    second_moment: String,
    mu_d2_q2: String,
    residual2: String,
    mode: Mode,
    reconstructed: String,
    identity: bool,
    paper_residual: String,
}

pub fn second_moment(st: &Settings) -> Result<Outcome<SecondMomentRow>, CliError> {
    let rows = st
        .families()?
        .iter()
        .map(|spec| {
            let r = MomentReport::compute(spec);
            let rec = match st.mode {
                Mode::Exact => &r.second_moment_exact,
                Mode::Paper => &r.second_moment_paper,
            };
            SecondMomentRow {
                seed: st.seed,
                key: r.key.clone(),
                q: r.q,
                d: r.d,
                s: r.s,
                mean: rat(&r.mean),
                mu_d_q: rat(&r.mean_main_term()),
                residual: rat(&r.mean_residual()),
                second_moment: rat(&r.second_moment),
                mu_d2_q2: rat(&r.second_moment_main_term()),
                residual2: rat(&r.second_moment_residual()),
                mode: st.mode,
                reconstructed: rat(rec),
                identity: *rec == r.second_moment,
                paper_residual: rat(&r.paper_residual()),
            }
        })
        .collect();
    Ok(Outcome::ok(rows))
}

fn chi_method(st: &Settings) -> Result<ChiMethod, CliError> {
    match st.method.as_deref() {
        None | Some("profile") => Ok(ChiMethod::Profile),
        Some("subsets") => Ok(ChiMethod::Subsets),
        Some(m) => Err(CliError::Usage(format!("unknown chi method `{m}`"))),
    }
}

#[derive(Serialize)]
pub struct ChiRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    method: &'static str,
    r: usize,
    chi: String,
}

pub fn chi(st: &Settings) -> Result<Outcome<ChiRow>, CliError> {
    let method = chi_method(st)?;
    let name = if method == ChiMethod::Profile { "profile" } else { "subsets" };
    let mut rows = Vec::new();
    for spec in st.families()? {
        let (d, s) = (spec.d(), spec.s());
        for r in d - s + 1..=d {
            let v = chi_r(&spec, r, method, st.budget).map_err(counting)?;
            rows.push(ChiRow { seed: st.seed, key: spec.key(), q: spec.q(), d, s, method: name, r, chi: v.to_string() });
        }
    }
    Ok(Outcome::ok(rows))
}

#[derive(Serialize)]
pub struct SmnRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    method: &'static str,
    m: usize,
    n: usize,
    smn: String,
}

pub fn smn(st: &Settings) -> Result<Outcome<SmnRow>, CliError> {
    let method = match st.method.as_deref() {
        None | Some("profile") => SmnMethod::Profile,
        Some("brute") => SmnMethod::Brute,
        Some(m) => return Err(CliError::Usage(format!("unknown smn method `{m}`"))),
    };
    let name = if method == SmnMethod::Profile { "profile" } else { "brute" };
    let mut rows = Vec::new();
    for spec in st.families()? {
        let d = spec.d();
        let table = (method == SmnMethod::Profile).then(|| scan(&spec, ScanOptions::default()).smn);
        for (m, n) in (1..=d).cartesian_product(1..=d) {
            let v = match &table {
                Some(t) => t[m][n].clone(),
                None => s_mn(&spec, m, n, method, st.budget).map_err(counting)?,
            };
            let (q, s) = (spec.q(), spec.s());
            rows.push(SmnRow { seed: st.seed, key: spec.key(), q, d, s, method: name, m, n, smn: v.to_string() });
        }
    }
    Ok(Outcome::ok(rows))
}

#[derive(Serialize)]
pub struct GammaRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    method: &'static str,
    r: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
    affine_open: String,
    closed: String,
}

/// `scan` uses value histograms; `reference` recomputes from root profiles.
pub fn gamma(st: &Settings) -> Result<Outcome<GammaRow>, CliError> {
    let reference = match st.method.as_deref() {
        None | Some("scan") => false,
        Some("reference") => true,
        Some(m) => return Err(CliError::Usage(format!("unknown gamma method `{m}`"))),
    };
    let name = if reference { "reference" } else { "scan" };
    let mut rows = Vec::new();
    for spec in st.families()? {
        let (q, d, s) = (spec.q(), spec.d(), spec.s());
        let totals = (!reference).then(|| scan(&spec, ScanOptions { multiplicities: true, ..Default::default() }));
        let row = |r, m, n, g: vslab::counting::GammaCounts| GammaRow {
            seed: st.seed,
            key: spec.key(),
            q,
            d,
            s,
            method: name,
            r,
            m,
            n,
            affine_open: g.affine_open.to_string(),
            closed: g.closed.to_string(),
        };
        for r in 1..=d {
            let g = match &totals {
                Some(t) => gamma_r_from_scan(t, r).expect("multiplicities requested"),
                None => gamma_counts_r(&spec, r).map_err(counting)?,
            };
            rows.push(row(Some(r), None, None, g));
        }
        for (m, n) in (1..=d).cartesian_product(1..=d) {
            let g = match &totals {
                Some(t) => gamma_mn_from_scan(t, m, n).expect("multiplicities requested"),
                None => gamma_counts_mn(&spec, m, n).map_err(counting)?,
            };
            rows.push(row(None, Some(m), Some(n), g));
        }
    }
    Ok(Outcome::ok(rows))
}

#[derive(Serialize)]
pub struct IdentityRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    a: String,
    chi_method: &'static str,
    mean: String,
    mean_reconstructed: Option<String>,
    mean_ok: Option<bool>,
    second_moment: String,
    second_moment_reconstructed: String,
    second_moment_ok: bool,
    paper_residual: String,
}

pub fn verify_identities(st: &Settings) -> Result<Outcome<IdentityRow>, CliError> {
    let method = chi_method(st)?;
    let mut out = Outcome::ok(Vec::new());
    for spec in st.families()? {
        let report = MomentReport::compute(&spec);
        let mean_rec = if method == ChiMethod::Subsets && spec.s() >= 1 {
            let (d, s) = (spec.d(), spec.s());
            let chi = (d - s + 1..=d)
                .map(|r| chi_r(&spec, r, method, st.budget).map(|c| (r, c)))
                .collect::<Result<_, _>>()
                .map_err(counting)?;
            reconstruct_mean(&spec, &ChiVector(chi)).ok()
        } else {
            report.mean_reconstructed.clone()
        };
        let v2_rec = reconstruct_second_moment(&spec, &report.mean, &report.s_matrix, Mode::Exact)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mean_ok = mean_rec.as_ref().map(|m| *m == report.mean);
        let v2_ok = v2_rec == report.second_moment;
        if mean_ok == Some(false) {
            out.failures.push(format!("{}: mean reconstruction differs", spec.key()));
        }
        if !v2_ok {
            out.failures.push(format!("{}: second-moment reconstruction differs", spec.key()));
        }
        out.rows.push(IdentityRow {
            seed: st.seed,
            key: spec.key(),
            q: spec.q(),
            d: spec.d(),
            s: spec.s(),
            a: a_text(&spec),
            chi_method: if method == ChiMethod::Profile { "profile" } else { "subsets" },
            mean: rat(&report.mean),
            mean_reconstructed: mean_rec.as_ref().map(rat),
            mean_ok,
            second_moment: rat(&report.second_moment),
            second_moment_reconstructed: rat(&v2_rec),
            second_moment_ok: v2_ok,
            paper_residual: rat(&report.paper_residual()),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct BoundRow {
    seed: u64,
    key: String,
    kind: String,
    q: u64,
    d: usize,
    s: usize,
    r: Option<usize>,
    m: Option<usize>,
    n: Option<usize>,
    lhs: String,
    rhs: String,
    applicable: bool,
    pass: Option<bool>,
}

pub fn verify_bounds(st: &Settings) -> Result<Outcome<BoundRow>, CliError> {
    let mut out = Outcome::ok(Vec::new());
    for spec in st.families()? {
        let totals = scan(&spec, ScanOptions { multiplicities: true, ..Default::default() });
        for c in bound_suite_from_scan(&spec, &totals) {
            let c = c.to_serializable();
            if c.pass == Some(false) {
                out.failures.push(format!("{} {} r={:?} m={:?} n={:?}", spec.key(), c.kind, c.r, c.m, c.n));
            }
            out.rows.push(BoundRow {
                seed: st.seed,
                key: spec.key(),
                kind: c.kind,
                q: c.q,
                d: c.d,
                s: c.s,
                r: c.r,
                m: c.m,
                n: c.n,
                lhs: c.lhs,
                rhs: c.rhs,
                applicable: c.applicable,
                pass: c.pass,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct SweepRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    a: String,
    mean: String,
    mu_d_q: String,
    residual: String,
    chi: String,
    bounds_applicable: usize,
    bounds_passed: usize,
    bounds_ok: Option<bool>,
}

pub fn sweep(st: &Settings) -> Result<Outcome<SweepRow>, CliError> {
    let mut out = Outcome::ok(Vec::new());
    for spec in st.families()? {
        let totals = scan(&spec, ScanOptions { multiplicities: true, ..Default::default() });
        let report = MomentReport::from_scan(&spec, &totals);
        let checks = bound_suite_from_scan(&spec, &totals);
        let applicable = checks.iter().filter(|c| c.applicable).count();
        let passed = checks.iter().filter(|c| c.pass == Some(true)).count();
        let ok = (applicable > 0).then_some(passed == applicable);
        if ok == Some(false) {
            out.failures.push(format!("{}: {} of {applicable} bound checks failed", spec.key(), applicable - passed));
        }
        out.rows.push(SweepRow {
            seed: st.seed,
            key: spec.key(),
            q: spec.q(),
            d: spec.d(),
            s: spec.s(),
            a: a_text(&spec),
            mean: rat(&report.mean),
            mu_d_q: rat(&report.mean_main_term()),
            residual: rat(&report.mean_residual()),
            chi: chi_text(&report.chi),
            bounds_applicable: applicable,
            bounds_passed: passed,
            bounds_ok: ok,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct AppendixRow {
    seed: u64,
    check: &'static str,
    p: u32,
    d: usize,
    case: String,
    matched: vslab::appendix::Match,
    scalar: Option<u32>,
    deg_b0: Option<u32>,
    computed: String,
    target: String,
    diagnostic_target: Option<String>,
    diagnostic_matched: Option<vslab::appendix::Match>,
}

fn appendix_row(seed: u64, check: &'static str, r: &AppendixReport) -> AppendixRow {
    let o = r.to_serializable();
    AppendixRow {
        seed,
        check,
        p: o.p,
        d: o.d,
        case: o.case,
        matched: o.matched,
        scalar: o.scalar,
        deg_b0: o.deg_b0,
        computed: o.computed,
        target: o.target,
        diagnostic_target: o.diagnostic_target,
        diagnostic_matched: o.diagnostic_matched,
    }
}

/// Discriminant case check and first-subresultant term check for each
/// prime field and degree given.
pub fn appendix(st: &Settings) -> Result<Outcome<AppendixRow>, CliError> {
    st.require_fields()?;
    let mut out = Outcome::ok(Vec::new());
    for field in &st.fields {
        if field.k() != 1 {
            return Err(CliError::Usage(format!("appendix checks need a prime field, got {}", field.descriptor())));
        }
        let p = field.p();
        for &d in &st.ds {
            let disc = appendix_case_check(p, d).map_err(|e| CliError::Usage(e.to_string()))?;
            let sub = subres1_terms_check(p, d).map_err(|e| CliError::Usage(e.to_string()))?;
            for (name, r) in [("disc", &disc), ("subres1", &sub)] {
                if !r.matched.passed() {
                    out.failures.push(format!("{name} (p, d) = ({p}, {d}) [{}]: {} vs {}", r.case, r.computed, r.target));
                }
                out.rows.push(appendix_row(st.seed, name, r));
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct AuditRow {
    seed: u64,
    key: String,
    q: u32,
    d: usize,
    s: usize,
    m: usize,
    n: usize,
    gamma1: String,
    gamma2: String,
    rank: usize,
    count_all: String,
    count_strict: String,
    expected: String,
    brute_all: Option<String>,
    brute_strict: Option<String>,
    ok: bool,
}

/// `--trials` random disjoint `(Γ₁, Γ₂)` with `2 ≤ m + n ≤ d − s` per
/// family, drawn from ChaCha8 seeded with `--seed`, one stream per family.
pub fn audit_linear(st: &Settings) -> Result<Outcome<AuditRow>, CliError> {
    let mut out = Outcome::ok(Vec::new());
    for (idx, spec) in st.families()?.into_iter().enumerate() {
        let (q, d, s) = (spec.q(), spec.d(), spec.s());
        if d - s < 2 {
            return Err(CliError::Usage(format!("{}: needs d − s ≥ 2", spec.key())));
        }
        if (q as usize) < d - s {
            return Err(CliError::Usage(format!("{}: q below d − s", spec.key())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
        rng.set_stream(idx as u64);
        let elems: Vec<FieldElement> = spec.field().elements().collect();
        let search = (q as u128).saturating_pow((d - s + 1) as u32);
        for _ in 0..st.trials {
            let total = rng.gen_range(2..=d - s);
            let m = rng.gen_range(1..total);
            let n = total - m;
            let picked: Vec<FieldElement> = elems.choose_multiple(&mut rng, total).copied().collect();
            let (g1, g2) = picked.split_at(m);
            let audit = linear_system_audit(&spec, g1, g2).map_err(counting)?;
            let expected = num_traits::pow(BigUint::from(q), d - s + 1 - total);
            let brute = if search <= st.budget {
                Some(linear_system_brute(&spec, g1, g2, st.budget).map_err(counting)?)
            } else {
                None
            };
            let brute_ok = brute.as_ref().map_or(true, |(all, strict)| *all == audit.count_all && *strict == audit.count_strict);
            let ok = audit.rank == total && audit.count_all == expected && brute_ok;
            let show = |g: &[FieldElement]| g.iter().map(|x| x.index().to_string()).join(" ");
            if !ok {
                out.failures.push(format!("{} gamma1 = [{}] gamma2 = [{}]", spec.key(), show(g1), show(g2)));
            }
            out.rows.push(AuditRow {
                seed: st.seed,
                key: spec.key(),
                q,
                d,
                s,
                m,
                n,
                gamma1: show(g1),
                gamma2: show(g2),
                rank: audit.rank,
                count_all: audit.count_all.to_string(),
                count_strict: audit.count_strict.to_string(),
                expected: expected.to_string(),
                brute_all: brute.as_ref().map(|b| b.0.to_string()),
                brute_strict: brute.as_ref().map(|b| b.1.to_string()),
                ok,
            });
        }
    }
    Ok(out)
}
