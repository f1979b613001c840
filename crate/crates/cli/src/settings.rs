//! Flag and config-file resolution into concrete family lists.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use vslab::counting::DEFAULT_BUDGET;
use vslab::family::FamilySpec;
use vslab::gf::FieldSpec;
use vslab::moments::Mode;

use crate::CliError;

/// Options shared by every experiment subcommand. Each may also come from
/// `--config`; flags win over the file, the file over `VSLAB_WORKERS`.
#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Field descriptor `p`, `p^k` or `p^k/c0,..,ck`.
    #[arg(long)]
    pub field: Option<String>,
    /// Comma-separated field descriptors.
    #[arg(long)]
    pub fields: Option<String>,
    /// Degree: `N`, `A..B` (inclusive) or `A,B,..`.
    #[arg(long)]
    pub d: Option<String>,
    /// Number of fixed top coefficients, same syntax as `--d`.
    #[arg(long)]
    pub s: Option<String>,
    /// Fixed coefficients: `i,j,..` (field indices), `all`, or `random:N`.
    #[arg(long)]
    pub a: Option<String>,
    /// Seed for `random:N` and `audit-linear` draws (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; `.csv` selects CSV, anything else JSON. Stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to VSLAB_WORKERS
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON file with the same keys as these flags; flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Counting method (chi: profile|subsets, smn: profile|brute, gamma: scan|reference).
    #[arg(long)]
    pub method: Option<String>,
    /// Second-moment reconstruction: exact|paper.
    #[arg(long)]
    pub mode: Option<String>,
    /// Enumeration cap for brute-force methods.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Random subset pairs per family for `audit-linear`.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    field: Option<String>,
    fields: Option<String>,
    d: Option<IntSpec>,
    s: Option<IntSpec>,
    a: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    method: Option<String>,
    mode: Option<String>,
    budget: Option<u128>,
    trials: Option<usize>,
}

/// Integers in a config file may be numbers or range strings.
#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum IntSpec {
    Num(u64),
    Text(String),
}

impl IntSpec {
    fn into_text(self) -> String {
        match self {
            IntSpec::Num(n) => n.to_string(),
            IntSpec::Text(t) => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ASelect {
    Explicit(Vec<u32>),
    All,
    Random(usize),
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub fields: Vec<Arc<FieldSpec>>,
    pub ds: Vec<usize>,
    pub ss: Vec<usize>,
    pub a: ASelect,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub method: Option<String>,
    pub mode: Mode,
    pub budget: u128,
    pub trials: usize,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Opts {
    fn fill_from(mut self, file: ConfigFile) -> Opts {
        self.field = self.field.or(file.field);
        self.fields = self.fields.or(file.fields);
        self.d = self.d.or(file.d.map(IntSpec::into_text));
        self.s = self.s.or(file.s.map(IntSpec::into_text));
        self.a = self.a.or(file.a);
        self.seed = self.seed.or(file.seed);
        self.out = self.out.or(file.out);
        self.workers = self.workers.or(file.workers);
        self.method = self.method.or(file.method);
        self.mode = self.mode.or(file.mode);
        self.budget = self.budget.or(file.budget);
        self.trials = self.trials.or(file.trials);
        self
    }

    pub fn resolve(self) -> Result<Settings, CliError> {
        let opts = match &self.config {
            Some(path) => {
                let file = read_config(path)?;
                self.clone().fill_from(file)
            }
            None => self,
        };
        let mut fields = Vec::new();
        if let Some(f) = &opts.field {
            fields.push(parse_field(f)?);
        }
        if let Some(list) = &opts.fields {
            fields.extend(parse_field_list(list)?);
        }
        let workers = match opts.workers {
            Some(w) => Some(w),
            None => match std::env::var("VSLAB_WORKERS") {
                Ok(v) => Some(v.trim().parse().map_err(|_| usage(format!("VSLAB_WORKERS = `{v}` is not a count")))?),
                Err(_) => None,
            },
        };
        if workers == Some(0) {
            return Err(usage("worker count must be positive"));
        }
        let budget = opts.budget.unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(usage("budget must be positive"));
        }
        let mode = match opts.mode.as_deref() {
            None | Some("exact") => Mode::Exact,
            Some("paper") => Mode::Paper,
            Some(m) => return Err(usage(format!("unknown mode `{m}`"))),
        };
        Ok(Settings {
            fields,
            ds: opts.d.as_deref().map(parse_ints).transpose()?.unwrap_or_default(),
            ss: opts.s.as_deref().map(parse_ints).transpose()?.unwrap_or_default(),
            a: parse_a(opts.a.as_deref().unwrap_or("all"))?,
            seed: opts.seed.unwrap_or(0),
            out: opts.out,
            workers,
            method: opts.method,
            mode,
            budget,
            trials: opts.trials.unwrap_or(50),
        })
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_field(text: &str) -> Result<Arc<FieldSpec>, CliError> {
    text.trim()
        .parse::<FieldSpec>()
        .map(Arc::new)
        .map_err(|e| usage(format!("field `{text}`: {e}")))
}

/// Splits on commas, keeping the `k + 1` modulus coefficients of a
/// `p^k/c0,..,ck` descriptor together.
pub fn parse_field_list(text: &str) -> Result<Vec<Arc<FieldSpec>>, CliError> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        let mut desc = tok.to_string();
        i += 1;
        if let Some((head, _)) = tok.split_once('/') {
            let k: usize = head
                .split_once('^')
                .and_then(|(_, k)| k.parse().ok())
                .ok_or_else(|| usage(format!("field `{tok}`: modulus needs an explicit p^k")))?;
            for _ in 0..k {
                let c = tokens.get(i).ok_or_else(|| usage(format!("field `{tok}`: too few modulus coefficients")))?;
                desc.push(',');
                desc.push_str(c);
                i += 1;
            }
        }
        out.push(parse_field(&desc)?);
    }
    Ok(out)
}

pub fn parse_ints(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || usage(format!("expected `N`, `A..B` or `A,B,..`, got `{text}`"));
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

pub fn parse_a(text: &str) -> Result<ASelect, CliError> {
    let text = text.trim();
    if text == "all" {
        return Ok(ASelect::All);
    }
    if let Some(n) = text.strip_prefix("random:") {
        let n: usize = n.parse().map_err(|_| usage(format!("bad random count in `{text}`")))?;
        if n == 0 {
            return Err(usage("random count must be positive"));
        }
        return Ok(ASelect::Random(n));
    }
    if text.is_empty() {
        return Ok(ASelect::Explicit(Vec::new()));
    }
    text.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| usage(format!("bad coefficient `{t}` in --a"))))
        .collect::<Result<_, _>>()
        .map(ASelect::Explicit)
}

impl Settings {
    pub fn require_fields(&self) -> Result<(), CliError> {
        if self.fields.is_empty() {
            return Err(usage("no field given (--field or --fields)"));
        }
        if self.ds.is_empty() {
            return Err(usage("no degree given (--d)"));
        }
        Ok(())
    }

    /// Families in order field, d, s, then `a` (lexicographic, or sampled).
    ///
    /// `random:N` draws `min(N, q^s)` distinct `a` from ChaCha8 seeded with
    /// `--seed`, one stream per `(field, d, s)` combination in this order.
    pub fn families(&self) -> Result<Vec<FamilySpec>, CliError> {
        self.require_fields()?;
        if self.ss.is_empty() {
            return Err(usage("no s given (--s)"));
        }
        let mut out = Vec::new();
        let mut stream = 0u64;
        for field in &self.fields {
            for &d in &self.ds {
                for &s in &self.ss {
                    let ok = (d >= 2 && s + 2 <= d) || (d == 1 && s == 0);
                    if !ok {
                        if self.ds.len() * self.ss.len() == 1 {
                            return Err(usage(format!("invalid family: d = {d}, s = {s}")));
                        }
                        continue;
                    }
                    for a in self.a_choices(field, s, stream)? {
                        let a = a.into_iter().map(|i| field.element(i)).collect();
                        let spec = FamilySpec::new(field.clone(), d, s, a).map_err(|e| usage(e.to_string()))?;
                        out.push(spec);
                    }
                    stream += 1;
                }
            }
        }
        if out.is_empty() {
            return Err(usage("no valid (d, s) combination"));
        }
        Ok(out)
    }

    fn a_choices(&self, field: &FieldSpec, s: usize, stream: u64) -> Result<Vec<Vec<u32>>, CliError> {
        let q = field.q() as u64;
        let total = q.checked_pow(s as u32).filter(|&t| t <= usize::MAX as u64);
        let decode = |mut idx: u64| -> Vec<u32> {
            let mut a = vec![0u32; s];
            for slot in a.iter_mut().rev() {
                *slot = (idx % q) as u32;
                idx /= q;
            }
            a
        };
        match &self.a {
            ASelect::Explicit(v) => {
                if v.len() != s {
                    return Err(usage(format!("--a has {} entries but s = {s}", v.len())));
                }
                if let Some(bad) = v.iter().find(|&&i| i as u64 >= q) {
                    return Err(usage(format!("coefficient index {bad} is not below q = {q}")));
                }
                Ok(vec![v.clone()])
            }
            ASelect::All => {
                let total = total.filter(|&t| t <= self.budget as u64).ok_or_else(|| {
                    usage(format!("--a all needs q^s = {q}^{s} families, above the budget"))
                })?;
                Ok((0..total).map(decode).collect())
            }
            ASelect::Random(n) => {
                let total = total.ok_or_else(|| usage("q^s too large to sample"))? as usize;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(stream);
                let mut picks: Vec<usize> = sample(&mut rng, total, (*n).min(total)).into_vec();
                picks.sort_unstable();
                Ok(picks.into_iter().map(|i| decode(i as u64)).collect())
            }
        }
    }
}
