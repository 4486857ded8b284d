//! Spreading/vanishing verdicts and the search for the critical front
//! coefficient.
//!
//! Spreading is certified: a front that has ever exceeded `Lambda` cannot stay
//! bounded. Vanishing has no finite-time certificate, so the verdict is a
//! heuristic requiring collapsed populations *and* a stalled front below
//! `Lambda`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lambda_threshold, InitSpec, InitialData, ModelParams, ProblemKind};
use crate::solver::{simulate_with, GridSpec, RunOptions, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    SpreadingCertified,
    VanishingHeuristic,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verdict::SpreadingCertified => "SpreadingCertified",
            Verdict::VanishingHeuristic => "VanishingHeuristic",
            Verdict::Undetermined => "Undetermined",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub final_s: f64,
    pub final_sup_u: f64,
    pub final_sup_v: f64,
    pub final_s_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// When the verdict fired: the first crossing of `Lambda` for spreading,
    /// the start of the final sub-tolerance stretch for vanishing.
    pub certificate_time: Option<f64>,
    pub lambda: f64,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Populations below this count as collapsed.
    pub tol_vanish: f64,
    /// Stall tolerance relative to `Lambda` for front growth over the final
    /// 20% of the run.
    pub tol_stall_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_vanish: 1e-3,
            tol_stall_rel: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_vanish > 0.0 && self.tol_stall_rel > 0.0) {
            return Err(Error::Config("classifier tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Classifies `record` against the threshold `lam`.
pub fn classify_run(record: &RunRecord, lam: f64, tol_vanish: f64, tol_stall: f64) -> Result<Classification> {
    if !(lam.is_finite() && lam > 0.0) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lam}")));
    }
    if !(tol_vanish > 0.0 && tol_stall > 0.0) {
        return Err(Error::Precondition("tolerances must be positive".into()));
    }
    let series = &record.series;
    let last = *series
        .first()
        .and_then(|_| series.last())
        .ok_or_else(|| Error::Precondition("empty record".into()))?;
    let evidence = Evidence {
        final_s: last.s,
        final_sup_u: last.sup_u,
        final_sup_v: last.sup_v,
        final_s_prime: last.s_prime,
    };
    let done = |verdict, certificate_time| {
        Ok(Classification {
            verdict,
            certificate_time,
            lambda: lam,
            evidence,
        })
    };

    if series[0].s >= lam {
        return done(Verdict::SpreadingCertified, Some(series[0].t));
    }
    if let Some(p) = series.iter().find(|p| p.s > lam) {
        return done(Verdict::SpreadingCertified, Some(p.t));
    }

    let collapsed = |p: &crate::solver::Sample| p.sup_u < tol_vanish && p.sup_v < tol_vanish;
    let t0 = series[0].t;
    let window_start = last.t - 0.2 * (last.t - t0);
    let s_window = series.iter().find(|p| p.t >= window_start).map_or(last.s, |p| p.s);
    if last.t > t0 && collapsed(&last) && last.s - s_window < tol_stall {
        let start = series.iter().rposition(|p| !collapsed(p)).map_or(0, |i| i + 1);
        return done(Verdict::VanishingHeuristic, Some(series[start].t));
    }
    done(Verdict::Undetermined, None)
}

/// [`classify_run`] with `Lambda` taken from the record and tolerances from `tol`.
pub fn classify_record(record: &RunRecord, tol: &Tolerances) -> Result<Classification> {
    let lam = lambda_threshold(&record.params, record.kind);
    classify_run(record, lam, tol.tol_vanish, tol.tol_stall_rel * lam)
}

/// Runs one simulation and classifies it, stopping as soon as spreading is
/// certified.
pub fn probe(
    params: &ModelParams,
    kind: ProblemKind,
    init: &InitialData,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<Classification> {
    let lam = lambda_threshold(params, kind);
    let record = simulate_with(params, kind, init, grid, &RunOptions { stop_above: Some(lam) })?;
    if let Some(failure) = &record.failure {
        return Err(Error::Consistency(format!(
            "solver failure at mu = {}: {failure}",
            params.mu
        )));
    }
    classify_record(&record, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub mu: f64,
    pub verdict: Verdict,
    /// Horizon that produced the verdict (after any escalation).
    pub t_max: f64,
}

/// Current bracket `[mu_lo, mu_hi]` around the critical coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    /// Largest coefficient seen to vanish.
    pub mu_lo: f64,
    /// Smallest coefficient seen to spread.
    pub mu_hi: f64,
    pub width: f64,
    pub history: Vec<HistoryEntry>,
}

impl ThresholdBracket {
    pub fn relative_width(&self) -> f64 {
        self.width / self.mu_hi
    }

    fn narrow(&mut self, entry: HistoryEntry) {
        match entry.verdict {
            Verdict::VanishingHeuristic => self.mu_lo = self.mu_lo.max(entry.mu),
            Verdict::SpreadingCertified => self.mu_hi = self.mu_hi.min(entry.mu),
            Verdict::Undetermined => {}
        }
        self.width = self.mu_hi - self.mu_lo;
        self.history.push(entry);
    }
}

/// Fails if some coefficient spreads while a larger one vanishes.
pub fn check_monotone(history: &[HistoryEntry]) -> Result<()> {
    let spreading = history
        .iter()
        .filter(|e| e.verdict == Verdict::SpreadingCertified)
        .map(|e| e.mu);
    let vanishing = || {
        history
            .iter()
            .filter(|e| e.verdict == Verdict::VanishingHeuristic)
            .map(|e| e.mu)
    };
    for s in spreading {
        if let Some(v) = vanishing().filter(|&v| v > s).reduce(f64::max) {
            return Err(Error::NonMonotone {
                spreading_mu: s,
                vanishing_mu: v,
            });
        }
    }
    Ok(())
}

/// Bisection settings for [`find_mu_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub bracket: (f64, f64),
    /// Stop once `(mu_hi - mu_lo) / mu_hi <= rel_tol`.
    pub rel_tol: f64,
    /// Horizon doublings allowed for an undetermined probe.
    pub max_retries: u32,
    pub tolerances: Tolerances,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            bracket: (1e-3, 1e2),
            rel_tol: 0.05,
            max_retries: 3,
            tolerances: Tolerances::default(),
        }
    }
}

/// Classifies the coefficient `mu`, doubling the horizon on undetermined
/// verdicts up to `max_retries` times.
fn decide(
    verdict_at: &mut impl FnMut(f64, f64) -> Result<Verdict>,
    mu: f64,
    t_max: f64,
    max_retries: u32,
) -> Result<HistoryEntry> {
    let mut horizon = t_max;
    for _ in 0..=max_retries {
        let verdict = verdict_at(mu, horizon)?;
        if verdict != Verdict::Undetermined {
            return Ok(HistoryEntry {
                mu,
                verdict,
                t_max: horizon,
            });
        }
        horizon *= 2.0;
    }
    Err(Error::Undetermined {
        mu,
        retries: max_retries,
    })
}

/// Geometric bisection driven by an arbitrary verdict oracle
/// `verdict_at(mu, t_max)`. Starting from `resume` when given, otherwise from
/// the endpoints of `search.bracket`, which must vanish and spread
/// respectively. `on_probe` sees the bracket after every probe.
pub fn bisect_threshold(
    search: &ThresholdSearch,
    t_max: f64,
    resume: Option<ThresholdBracket>,
    mut verdict_at: impl FnMut(f64, f64) -> Result<Verdict>,
    mut on_probe: impl FnMut(&ThresholdBracket),
) -> Result<ThresholdBracket> {
    let (lo, hi) = search.bracket;
    if !(lo > 0.0 && hi > lo && search.rel_tol > 0.0) {
        return Err(Error::Config(format!(
            "invalid bracket [{lo}, {hi}] or tolerance {}",
            search.rel_tol
        )));
    }
    let mut bracket = match resume {
        Some(b) => b,
        None => {
            let mut b = ThresholdBracket {
                mu_lo: lo,
                mu_hi: hi,
                width: hi - lo,
                history: Vec::new(),
            };
            for (mu, want) in [(lo, Verdict::VanishingHeuristic), (hi, Verdict::SpreadingCertified)] {
                let entry = decide(&mut verdict_at, mu, t_max, search.max_retries).map_err(|e| match e {
                    Error::Undetermined { .. } => Error::NoBracket(format!("endpoint mu = {mu} is undetermined")),
                    other => other,
                })?;
                if entry.verdict != want {
                    return Err(Error::NoBracket(format!(
                        "endpoint mu = {mu} gave {}, need {want}",
                        entry.verdict
                    )));
                }
                b.history.push(entry);
                on_probe(&b);
            }
            b
        }
    };
    while bracket.relative_width() > search.rel_tol {
        let mid = (bracket.mu_lo * bracket.mu_hi).sqrt();
        let entry = decide(&mut verdict_at, mid, t_max, search.max_retries)?;
        bracket.narrow(entry);
        check_monotone(&bracket.history)?;
        on_probe(&bracket);
    }
    check_monotone(&bracket.history)?;
    Ok(bracket)
}

/// Brackets the critical front coefficient for fixed data; `params.mu` is ignored.
pub fn find_mu_star(
    params: &ModelParams,
    kind: ProblemKind,
    init: &InitialData,
    grid: &GridSpec,
    search: &ThresholdSearch,
) -> Result<ThresholdBracket> {
    find_mu_star_resumable(params, kind, init, grid, search, None, |_| {})
}

pub fn find_mu_star_resumable(
    params: &ModelParams,
    kind: ProblemKind,
    init: &InitialData,
    grid: &GridSpec,
    search: &ThresholdSearch,
    resume: Option<ThresholdBracket>,
    on_probe: impl FnMut(&ThresholdBracket),
) -> Result<ThresholdBracket> {
    let lambda = lambda_threshold(params, kind);
    if params.s0 >= lambda {
        return Err(Error::NoThreshold { s0: params.s0, lambda });
    }
    search.tolerances.validate()?;
    let verdict_at = |mu: f64, t_max: f64| {
        let grid = GridSpec { t_max, ..*grid };
        probe(&params.with_mu(mu), kind, init, &grid, &search.tolerances).map(|c| c.verdict)
    };
    bisect_threshold(search, grid.t_max, resume, verdict_at, on_probe)
}

/// One planned run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub key: String,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub key: String,
    pub params: ModelParams,
    pub outcome: std::result::Result<Classification, String>,
}

/// Builds the row-major cross product of `mus` and `s0s` on top of `base`.
pub fn mu_s0_plan(base: &ModelParams, mus: &[f64], s0s: &[f64]) -> Vec<SweepEntry> {
    let width = (mus.len() * s0s.len()).to_string().len();
    let mut plan = Vec::with_capacity(mus.len() * s0s.len());
    for &s0 in s0s {
        for &mu in mus {
            let key = format!("run{:0width$}", plan.len());
            plan.push(SweepEntry {
                key,
                params: ModelParams { mu, s0, ..*base },
            });
        }
    }
    plan
}

/// Runs every entry (in parallel on the current rayon pool) and returns one
/// row per entry in plan order. Failures stay confined to their row.
pub fn sweep(
    plan: &[SweepEntry],
    kind: ProblemKind,
    init: &InitSpec,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<Vec<SweepRow>> {
    if plan.is_empty() {
        return Err(Error::Precondition("sweep plan is empty".into()));
    }
    let run = |entry: &SweepEntry| -> Result<Classification> {
        entry.params.validate()?;
        let data = init.build(kind, entry.params.s0)?;
        data.validate(kind)?;
        let record = simulate_with(&entry.params, kind, &data, grid, &RunOptions::default())?;
        if let Some(failure) = &record.failure {
            return Err(Error::Consistency(failure.clone()));
        }
        classify_record(&record, tol)
    };
    Ok(plan
        .par_iter()
        .map(|entry| SweepRow {
            key: entry.key.clone(),
            params: entry.params,
            outcome: run(entry).map_err(|e| e.to_string()),
        })
        .collect())
}

pub const SWEEP_HEADER: [&str; 13] = [
    "key",
    "mu",
    "k",
    "h",
    "r",
    "D",
    "rho",
    "s0",
    "verdict",
    "cert_time",
    "final_s",
    "final_sup_u",
    "final_sup_v",
];

pub fn write_sweep_csv(rows: &[SweepRow], path: &std::path::Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        let p = &row.params;
        let mut fields: Vec<String> = std::iter::once(row.key.clone())
            .chain([p.mu, p.k, p.h, p.r, p.d, p.rho, p.s0].map(|x| x.to_string()))
            .collect();
        match &row.outcome {
            Ok(c) => {
                fields.push(c.verdict.to_string());
                fields.push(c.certificate_time.map(|t| t.to_string()).unwrap_or_default());
                fields.extend(
                    [c.evidence.final_s, c.evidence.final_sup_u, c.evidence.final_sup_v].map(|x| x.to_string()),
                );
            }
            Err(_) => fields.extend([
                "Error".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]),
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
