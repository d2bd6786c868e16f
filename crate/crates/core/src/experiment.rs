//! Seeded experiment runner behind the command-line tool.
//!
//! Trial `t` of a run with seed `s` draws its fields from seeds derived from
//! `s + t` only, so reports do not depend on thread count or scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::CoeffField;
use crate::divcurl::{band_limited, divcurl_experiment, random_divcurl_pair, riesz_apply};
use crate::error::{Error, Result};
use crate::grid::{GridBox, GridFunction};
use crate::mra::{analyze, synthesize};
use crate::paraproduct::{kernel_probe, renormalize, self_similar_probes};
use crate::random::{random_field, FieldSpec};
use crate::spaces::{
    atom_verify, carleson_norm, finite_atomic_decompose, grand_maximal_norm_coeff, lipschitz_norm, lp_norm,
    sequence_hardy_norm, square_function_on, Exponents, VerifyOptions, Weight,
};
use crate::wavelet::{system_by_name, WaveletSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Decompose,
    Norms,
    Kernel,
    Atoms,
    Divcurl,
    Sweep,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "decompose" => Command::Decompose,
            "norms" => Command::Norms,
            "kernel" => Command::Kernel,
            "atoms" => Command::Atoms,
            "divcurl" => Command::Divcurl,
            "sweep" => Command::Sweep,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Fully resolved run configuration (echoed verbatim in every report).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub wavelet: String,
    pub n: usize,
    pub p: f64,
    pub j_min: i32,
    pub j_max: i32,
    #[serde(rename = "K")]
    pub k: i32,
    pub box_lo: f64,
    pub box_hi: f64,
    pub seed: u64,
    pub trials: usize,
    pub entries: usize,
    pub format: Format,
}

/// Raw command-line values before command-specific defaults are applied.
#[derive(Clone, Debug, Default)]
pub struct ConfigInput {
    pub command: String,
    pub wavelet: String,
    pub n: Option<usize>,
    pub p: f64,
    pub j_min: Option<i32>,
    pub j_max: Option<i32>,
    pub k: Option<i32>,
    pub box_lo: f64,
    pub box_hi: f64,
    pub seed: u64,
    pub trials: usize,
    pub entries: Option<usize>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.message)
    }
}

fn bad(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

/// Finest sampling level allowed per dimension (keeps grids below ~2^24).
fn k_cap(n: usize) -> i32 {
    match n {
        1 => 20,
        2 => 11,
        _ => 7,
    }
}

impl ConfigInput {
    pub fn resolve(&self) -> std::result::Result<ExperimentConfig, ConfigError> {
        let command = Command::parse(&self.command).ok_or_else(|| {
            bad(
                "command",
                format!("unknown command {:?} (decompose, norms, kernel, atoms, divcurl, sweep)", self.command),
            )
        })?;
        let sys = system_by_name(&self.wavelet).map_err(|e| bad("wavelet", e.to_string()))?;
        let n = self.n.unwrap_or(if command == Command::Divcurl { 2 } else { 1 });
        if !(1..=3).contains(&n) {
            return Err(bad("n", format!("{n} not in 1..=3")));
        }
        if command == Command::Divcurl && n != 2 {
            return Err(bad("n", "divcurl runs in two dimensions"));
        }
        Exponents::new(n, self.p).map_err(|_| {
            bad(
                "p",
                format!("{} not in ({}, 1) for n = {n}", self.p, n as f64 / (n as f64 + 1.0)),
            )
        })?;
        let (dj_min, dj_max, dk) = match command {
            Command::Kernel => (-6, 10, 0),
            Command::Divcurl => (0, 8, 8),
            _ => (0, 5, 5 + if sys.is_haar() { 0 } else { 4 }),
        };
        let j_min = self.j_min.unwrap_or(dj_min);
        let j_max = self.j_max.unwrap_or(dj_max);
        if j_min >= j_max {
            return Err(bad("jmin", format!("jmin = {j_min} must be below jmax = {j_max}")));
        }
        let k = self.k.unwrap_or(dk.max(j_max));
        if command != Command::Kernel {
            if k < j_max {
                return Err(bad("K", format!("K = {k} below jmax = {j_max}")));
            }
            if k > k_cap(n) {
                return Err(bad("K", format!("K = {k} above the cap {} for n = {n}", k_cap(n))));
            }
        }
        if command == Command::Divcurl && j_max != k {
            return Err(bad("jmax", "divcurl analyses all scales below K; set jmax = K"));
        }
        if !(self.box_lo < self.box_hi) {
            return Err(bad("box", format!("[{}, {}) is empty", self.box_lo, self.box_hi)));
        }
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1"));
        }
        let entries = self.entries.unwrap_or(if command == Command::Sweep { 50 } else { 100 });
        if entries == 0 {
            return Err(bad("entries", "must be at least 1"));
        }
        Ok(ExperimentConfig {
            command,
            wavelet: sys.name().to_string(),
            n,
            p: self.p,
            j_min,
            j_max,
            k,
            box_lo: self.box_lo,
            box_hi: self.box_hi,
            seed: self.seed,
            trials: self.trials,
            entries,
            format: self.format,
        })
    }
}

/// One asserted (or, without tolerance, reported) quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The identity or bound being checked.
    pub invariant: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, invariant: &str, value: f64, tol: Option<f64>) -> Check {
        Check {
            name: name.into(),
            invariant: invariant.into(),
            value,
            tolerance: tol,
            passed: tol.is_none_or(|t| value.is_finite() && value <= t),
        }
    }

    fn within(name: &str, invariant: &str, value: f64, target: f64, tol: f64) -> Check {
        Check {
            name: name.into(),
            invariant: invariant.into(),
            value,
            tolerance: Some(tol),
            passed: (value - target).abs() <= tol,
        }
    }
}

pub type Record = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub summary: Record,
    pub trials: Vec<Record>,
    pub passed: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Trial table with the config and checks as leading `#` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {}\n",
            serde_json::to_string(&self.config).expect("config serializes")
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "# check {} value={:e} tol={} passed={}\n",
                c.name,
                c.value,
                c.tolerance.map_or("none".to_string(), |t| format!("{t:e}")),
                c.passed
            ));
        }
        let keys: Vec<&String> = self.trials.first().map(|r| r.keys().collect()).unwrap_or_default();
        out.push_str("trial");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for (i, r) in self.trials.iter().enumerate() {
            out.push_str(&i.to_string());
            for k in &keys {
                out.push_str(&format!(",{:e}", r.get(*k).copied().unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

fn spec(cfg: &ExperimentConfig, entries: usize) -> FieldSpec {
    let mut s = FieldSpec::unit(cfg.n, cfg.j_min, cfg.j_max, entries);
    s.box_lo = vec![cfg.box_lo; cfg.n];
    s.box_hi = vec![cfg.box_hi; cfg.n];
    s
}

fn trial_seeds(cfg: &ExperimentConfig, t: usize) -> (u64, u64) {
    let s = cfg.seed.wrapping_add(t as u64);
    (s.wrapping_mul(2), s.wrapping_mul(2).wrapping_add(1))
}

fn run_trials(cfg: &ExperimentConfig, f: impl Fn(usize) -> Result<Record> + Sync + Send) -> Result<Vec<Record>> {
    (0..cfg.trials).into_par_iter().map(f).collect()
}

fn column(records: &[Record], key: &str) -> Vec<f64> {
    records.iter().map(|r| r[key]).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn spread(v: &[f64]) -> f64 {
    let lo = min_of(v);
    if lo > 0.0 {
        max_of(v) / lo
    } else {
        f64::INFINITY
    }
}

/// `sum_I c_I d_I`, the L2 pairing of two expansions.
fn coefficient_inner(f: &CoeffField, g: &CoeffField) -> f64 {
    let mut s: f64 = f.wavelets().map(|(i, v)| v * g.wavelet(i)).sum();
    s += f.scalings().map(|(q, v)| v * g.scaling(q)).sum::<f64>();
    s
}

/// Run the configured experiment. Errors are library failures (not check
/// failures, which are recorded in the report).
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let sys = system_by_name(&cfg.wavelet)?;
    let (checks, summary, trials) = match cfg.command {
        Command::Decompose => decompose(cfg, &sys)?,
        Command::Norms => norms(cfg, &sys)?,
        Command::Kernel => kernel(cfg, &sys)?,
        Command::Atoms => atoms(cfg, &sys)?,
        Command::Divcurl => divcurl(cfg, &sys)?,
        Command::Sweep => sweep(cfg, &sys)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(RunReport {
        tool: "paraproduct-kit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        checks,
        summary,
        trials,
        passed,
    })
}

type Parts = (Vec<Check>, Record, Vec<Record>);

fn decompose(cfg: &ExperimentConfig, sys: &WaveletSystem) -> Result<Parts> {
    let spec = spec(cfg, cfg.entries);
    let trials = run_trials(cfg, |t| {
        let (sf, sg) = trial_seeds(cfg, t);
        let f = random_field(sf, &spec);
        let g = random_field(sg, &spec);
        let scale = f.l2_norm() * g.l2_norm();
        let r = renormalize(&f, &g, sys, cfg.k)?;
        let mut rec = Record::new();
        rec.insert("entries_f".into(), f.len() as f64);
        rec.insert("entries_g".into(), g.len() as f64);
        rec.insert("reconstruction".into(), r.residual / scale.max(f64::MIN_POSITIVE));
        let mut cancel: f64 = 0.0;
        for i in 0..3 {
            let v = r.components[i].integral() / scale.max(f64::MIN_POSITIVE);
            rec.insert(format!("int_pi{}", i + 1), v);
            cancel = cancel.max(v.abs());
        }
        rec.insert("cancellation".into(), cancel);
        rec.insert(
            "pi4_vs_inner".into(),
            (r.components[3].integral() - coefficient_inner(&f, &g)).abs(),
        );
        rec.insert("terms".into(), r.term_count as f64);
        Ok(rec)
    })?;
    let recon_tol = if sys.is_haar() { 1e-10 } else { 1e-6 };
    let cancel_tol = if sys.is_haar() {
        Some(1e-10)
    } else if cfg.k - cfg.j_max >= 12 {
        Some(1e-6)
    } else {
        None
    };
    let recon = max_of(&column(&trials, "reconstruction"));
    let cancel = max_of(&column(&trials, "cancellation"));
    let pi4 = max_of(&column(&trials, "pi4_vs_inner"));
    let checks = vec![
        Check::at_most(
            "reconstruction",
            "fg = Pi_1 + Pi_2 + Pi_3 + Pi_4 pointwise, relative to |f|_2 |g|_2",
            recon,
            Some(recon_tol),
        ),
        Check::at_most(
            "cancellation",
            "int Pi_i(f, g) = 0 for i = 1, 2, 3, relative to |f|_2 |g|_2",
            cancel,
            cancel_tol,
        ),
        Check::at_most(
            "pi4_integral",
            "int Pi_4(f, g) = int fg = <f, g>",
            pi4,
            cancel_tol.map(|_| 1e-6),
        ),
    ];
    let mut summary = Record::new();
    summary.insert("max_reconstruction".into(), recon);
    summary.insert("max_cancellation".into(), cancel);
    summary.insert("max_pi4_vs_inner".into(), pi4);
    Ok((checks, summary, trials))
}

fn norms(cfg: &ExperimentConfig, sys: &WaveletSystem) -> Result<Parts> {
    let ex = Exponents::new(cfg.n, cfg.p)?;
    let w = Weight::new(cfg.n, cfg.p);
    let spec = spec(cfg, cfg.entries);
    let lo = (cfg.box_lo * (cfg.j_max as f64).exp2()).floor() * (-(cfg.j_max as f64)).exp2();
    let hi = (cfg.box_hi * (cfg.j_max as f64).exp2()).ceil() * (-(cfg.j_max as f64)).exp2();
    let grid = GridBox::from_bounds(cfg.j_max, &vec![lo; cfg.n], &vec![hi; cfg.n])?;
    let trials = run_trials(cfg, |t| {
        let (sf, _) = trial_seeds(cfg, t);
        let f = random_field(sf, &spec);
        let hardy = sequence_hardy_norm(&f, cfg.p, None)?;
        let brute = lp_norm(&square_function_on(&f, &grid)?, cfg.p, None)?;
        let mut rec = Record::new();
        rec.insert("hardy".into(), hardy);
        rec.insert("hardy_grid".into(), brute);
        rec.insert("hardy_gap".into(), (hardy - brute).abs() / brute.max(f64::MIN_POSITIVE));
        rec.insert("hardy_weighted".into(), sequence_hardy_norm(&f, cfg.p, Some(&w))?);
        rec.insert("carleson".into(), carleson_norm(&f, ex.alpha));
        rec.insert("carleson_bmo".into(), carleson_norm(&f, 0.0));
        if cfg.n <= 2 {
            rec.insert(
                "grand_maximal".into(),
                grand_maximal_norm_coeff(&f, sys, cfg.k, cfg.p, None, 8)?,
            );
        }
        Ok(rec)
    })?;
    let gap = max_of(&column(&trials, "hardy_gap"));
    let checks = vec![Check::at_most(
        "hardy_tree_vs_grid",
        "sequence Hardy norm on the dyadic tree equals the L^p norm of the sampled square function",
        gap,
        Some(1e-10),
    )];
    let mut summary = Record::new();
    summary.insert("alpha".into(), ex.alpha);
    for key in ["hardy", "hardy_weighted", "carleson"] {
        let v = column(&trials, key);
        summary.insert(format!("{key}_min"), min_of(&v));
        summary.insert(format!("{key}_max"), max_of(&v));
    }
    Ok((checks, summary, trials))
}

fn kernel(cfg: &ExperimentConfig, sys: &WaveletSystem) -> Result<Parts> {
    let n = cfg.n;
    let scales: Vec<f64> = (1..=6).map(|i| 0.5f64.powi(i)).collect();
    let probes = self_similar_probes(n, 5.0 / 16.0, 15.0 / 16.0, Some(9.0 / 16.0), &scales);
    let target = -2.0 * n as f64;
    let ops: Vec<usize> = (1..=4).collect();
    let results = ops
        .par_iter()
        .map(|&i| kernel_probe(i, sys, (cfg.j_min, cfg.j_max), &probes))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut trials = Vec::new();
    for kp in &results {
        let i = kp.operator;
        let mut rec = Record::new();
        rec.insert("operator".into(), i as f64);
        rec.insert("fitted_slope".into(), kp.fitted_slope);
        rec.insert("fitted_constant".into(), kp.fitted_constant);
        rec.insert("tail_estimate".into(), kp.tail_estimate);
        checks.push(Check::within(
            &format!("kernel{i}_size"),
            "|K(x, y, z)| ~ (|x - y| + |x - z|)^(-2n): fitted log-log slope",
            kp.fitted_slope,
            target,
            0.2,
        ));
        if let Some(reg) = &kp.regularity {
            rec.insert("regularity_slope".into(), reg.slope);
            rec.insert("regularity_constant".into(), reg.constant);
            checks.push(Check::within(
                &format!("kernel{i}_regularity"),
                "|K(x, y, z) - K(x', y, z)| / |x - x'| ~ (|x - y| + |x - z|)^(-2n-1): fitted slope",
                reg.slope,
                target - 1.0,
                0.3,
            ));
        }
        trials.push(rec);
    }
    let mut summary = Record::new();
    summary.insert("target_slope".into(), target);
    summary.insert("fitted_slope".into(), results[0].fitted_slope);
    Ok((checks, summary, trials))
}

fn atoms(cfg: &ExperimentConfig, sys: &WaveletSystem) -> Result<Parts> {
    let spec = spec(cfg, cfg.entries);
    let (dilation, tol) = if sys.is_haar() {
        (1.0, 1e-9)
    } else {
        (sys.support_len() as f64, 1e-2)
    };
    let trials = run_trials(cfg, |t| {
        let (sf, _) = trial_seeds(cfg, t);
        let f = random_field(sf, &spec);
        let d = finite_atomic_decompose(&f, cfg.p)?;
        let recon = d.reconstruct(&f)?.max_abs_diff(&f) / f.max_abs().max(f64::MIN_POSITIVE);
        let opts = VerifyOptions::default().dilated(dilation).with_tol(tol);
        let mut failed = 0usize;
        for (_, atom) in &d.terms {
            if !atom_verify(atom, sys, &opts)?.passed() {
                failed += 1;
            }
        }
        let mut rec = Record::new();
        rec.insert("atoms".into(), d.terms.len() as f64);
        rec.insert("failed_atoms".into(), failed as f64);
        rec.insert("reconstruction".into(), recon);
        rec.insert("mu_norm".into(), d.mu_norm);
        rec.insert("hardy".into(), d.hardy_norm);
        rec.insert("ratio".into(), d.ratio);
        Ok(rec)
    })?;
    let ratios = column(&trials, "ratio");
    let mut checks = vec![
        Check::at_most(
            "reconstruction",
            "sum_l mu_l a_l = f entrywise",
            max_of(&column(&trials, "reconstruction")),
            Some(1e-12),
        ),
        Check::at_most(
            "atom_bounds",
            "every atom: support in the dilated cube, |a|_2 <= |R|^(1/2-1/p), vanishing moments",
            column(&trials, "failed_atoms").iter().sum(),
            Some(0.0),
        ),
    ];
    if cfg.trials > 1 {
        checks.push(Check::at_most(
            "ratio_spread",
            "(sum |mu_l|^p)^(1/p) <= C |f|_Hp with one C: max/min of the ratio",
            spread(&ratios),
            Some(4.0),
        ));
    }
    let mut summary = Record::new();
    summary.insert("ratio_min".into(), min_of(&ratios));
    summary.insert("ratio_max".into(), max_of(&ratios));
    Ok((checks, summary, trials))
}

fn divcurl(cfg: &ExperimentConfig, sys: &WaveletSystem) -> Result<Parts> {
    // spectral identities on one seeded input
    let k = cfg.k;
    let cosine = GridFunction::from_fn(GridBox::unit(1, k), |x| (std::f64::consts::TAU * x[0]).cos());
    let sine = GridFunction::from_fn(GridBox::unit(1, k), |x| (std::f64::consts::TAU * x[0]).sin());
    let hilbert = riesz_apply(0, &cosine)?.max_abs_diff(&sine)?;
    let f0 = band_limited(cfg.seed, 2, k, 4);
    let mut acc = f0.clone();
    for i in 0..2 {
        acc.add_scaled(&riesz_apply(i, &riesz_apply(i, &f0)?)?, 1.0)?;
    }
    let riesz_square = acc.max_abs() / f0.max_abs();

    let trials = run_trials(cfg, |t| {
        let (sf, _) = trial_seeds(cfg, t);
        let (f, g) = random_divcurl_pair(sf, k, cfg.p, sys)?;
        let r = divcurl_experiment(&f, &g, cfg.p, sys)?;
        let mut rec = Record::new();
        rec.insert("ratio".into(), r.ratio);
        rec.insert("FG_weighted_Hp".into(), r.norms.fg_weighted_hp);
        rec.insert("A_H1".into(), r.norms.a_h1);
        rec.insert("B_Hp_w".into(), r.norms.b_hp_w);
        rec.insert("curl".into(), r.residuals.curl);
        rec.insert("div".into(), r.residuals.div);
        rec.insert("riesz_roundtrip".into(), r.residuals.riesz_roundtrip);
        rec.insert("riesz_divergence".into(), r.residuals.riesz_divergence);
        rec.insert("a_integral".into(), r.a_integral);
        Ok(rec)
    })?;
    let ratios = column(&trials, "ratio");
    let mut checks = vec![
        Check::at_most("hilbert_cosine", "Hilbert transform of cos is sin", hilbert, Some(1e-10)),
        Check::at_most("riesz_squares", "sum_i R_i R_i = -Id on zero-mean input", riesz_square, Some(1e-10)),
        Check::at_most("curl", "curl F = 0 spectrally", max_of(&column(&trials, "curl")), Some(1e-8)),
        Check::at_most("div", "div G = 0 spectrally", max_of(&column(&trials, "div")), Some(1e-8)),
        Check::at_most(
            "riesz_divergence",
            "sum_i R_i G_i = 0 for div-free G",
            max_of(&column(&trials, "riesz_divergence")),
            Some(1e-8),
        ),
        Check::at_most(
            "riesz_roundtrip",
            "F = grad (-Delta)^(-1/2) f with f = -sum_i R_i F_i",
            max_of(&column(&trials, "riesz_roundtrip")),
            Some(1e-8),
        ),
        Check::at_most(
            "a_cancellation",
            "int A(F, G) = int F.G = 0",
            max_of(&column(&trials, "a_integral").iter().map(|v| v.abs()).collect::<Vec<_>>()),
            Some(1e-6),
        ),
    ];
    if cfg.trials > 1 {
        checks.push(Check::at_most(
            "ratio_spread",
            "|F.G|_{H^p_w} <= C |F|_{H^p} |G|_Lip: max/min of the ratio",
            spread(&ratios),
            Some(4.0),
        ));
    }
    let mut summary = Record::new();
    summary.insert("ratio_min".into(), min_of(&ratios));
    summary.insert("ratio_max".into(), max_of(&ratios));
    Ok((checks, summary, trials))
}

/// One boundedness sample at resolution `k`: `(|T|_{H^p_w} seq, |S|_1)`.
fn sweep_norms(f: &CoeffField, g: &CoeffField, sys: &WaveletSystem, k: i32, j_min: i32, p: f64) -> Result<(f64, f64)> {
    let r = renormalize(f, g, sys, k)?;
    let t = r.t();
    let w = Weight::new(f.dim(), p);
    let tn = if t.grid().is_empty() {
        0.0
    } else {
        sequence_hardy_norm(&analyze(&t, sys, j_min, k)?, p, Some(&w))?
    };
    Ok((tn, r.s().l1_norm()))
}

/// `f` with unit sequence Hardy norm and `g` with unit Lipschitz norm.
pub fn normalized_pair(
    cfg: &ExperimentConfig,
    sys: &WaveletSystem,
    t: usize,
) -> Result<(CoeffField, CoeffField)> {
    let ex = Exponents::new(cfg.n, cfg.p)?;
    let spec = spec(cfg, cfg.entries);
    let (sf, sg) = trial_seeds(cfg, t);
    let f = random_field(sf, &spec);
    let g = random_field(sg, &spec);
    let hf = sequence_hardy_norm(&f, cfg.p, None)?;
    let lg = lipschitz_norm(&synthesize(&g, sys, cfg.k)?, ex.alpha, true)?;
    if hf == 0.0 || lg == 0.0 {
        return Err(Error::Precondition(format!("trial {t}: a field has zero norm")));
    }
    Ok((f.scaled(1.0 / hf), g.scaled(1.0 / lg)))
}

fn sweep(cfg: &ExperimentConfig, sys: &WaveletSystem) -> Result<Parts> {
    let trials = run_trials(cfg, |t| {
        let (f, g) = normalized_pair(cfg, sys, t)?;
        let (t0, s0) = sweep_norms(&f, &g, sys, cfg.k, cfg.j_min, cfg.p)?;
        let (t1, s1) = sweep_norms(&f, &g, sys, cfg.k + 1, cfg.j_min, cfg.p)?;
        let mut rec = Record::new();
        rec.insert("T_Hp_w".into(), t0);
        rec.insert("T_Hp_w_refined".into(), t1);
        rec.insert("S_L1".into(), s0);
        rec.insert("S_L1_refined".into(), s1);
        Ok(rec)
    })?;
    let change = |a: &str, b: &str| {
        let x = max_of(&column(&trials, a));
        let y = max_of(&column(&trials, b));
        if x > 0.0 && y > 0.0 {
            (x / y).max(y / x)
        } else {
            f64::INFINITY
        }
    };
    let finite = trials.iter().all(|r| r.values().all(|v| v.is_finite()));
    let checks = vec![
        Check {
            name: "finite".into(),
            invariant: "T(f, g) and S(f, g) norms finite for normalized f, g".into(),
            value: if finite { 0.0 } else { 1.0 },
            tolerance: Some(0.0),
            passed: finite,
        },
        Check::at_most(
            "T_refinement",
            "max |T(f,g)|_{H^p_w} over pairs stable under K -> K+1 (factor)",
            change("T_Hp_w", "T_Hp_w_refined"),
            Some(2.0),
        ),
        Check::at_most(
            "S_refinement",
            "max |S(f,g)|_{L^1} over pairs stable under K -> K+1 (factor)",
            change("S_L1", "S_L1_refined"),
            Some(2.0),
        ),
    ];
    let mut summary = Record::new();
    for key in ["T_Hp_w", "T_Hp_w_refined", "S_L1", "S_L1_refined"] {
        summary.insert(format!("{key}_max"), max_of(&column(&trials, key)));
    }
    Ok((checks, summary, trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(command: &str) -> ConfigInput {
        ConfigInput {
            command: command.into(),
            wavelet: "haar".into(),
            p: 0.95,
            box_hi: 1.0,
            trials: 2,
            ..Default::default()
        }
    }

    #[test]
    fn command_defaults() {
        let k = input("kernel").resolve().unwrap();
        assert_eq!((k.j_min, k.j_max, k.n), (-6, 10, 1));
        let d = input("divcurl").resolve().unwrap();
        assert_eq!((d.n, d.j_max, d.k), (2, 8, 8));
        let mut db = input("decompose");
        db.wavelet = "db3".into();
        let c = db.resolve().unwrap();
        assert_eq!((c.j_min, c.j_max, c.k, c.entries), (0, 5, 9, 100));
    }

    #[test]
    fn errors_name_fields() {
        let mut i = input("norms");
        i.p = 1.0;
        assert_eq!(i.resolve().unwrap_err().field, "p");
        let mut i = input("norms");
        i.k = Some(30);
        assert_eq!(i.resolve().unwrap_err().field, "K");
        let mut i = input("divcurl");
        i.j_max = Some(5);
        assert_eq!(i.resolve().unwrap_err().field, "jmax");
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = input("atoms").resolve().unwrap();
        let a = run(&cfg).unwrap();
        assert_eq!(a.to_json(), run(&cfg).unwrap().to_json());
        assert!(a.passed);
        assert_eq!(a.trials.len(), 2);
        let csv = a.to_csv();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
    }

    #[test]
    fn trial_seeds_are_disjoint() {
        let cfg = input("norms").resolve().unwrap();
        let (a, b) = trial_seeds(&cfg, 0);
        let (c, _) = trial_seeds(&cfg, 1);
        assert!(a != b && b != c && a != c);
    }
}
