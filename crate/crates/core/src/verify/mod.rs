//! Grid sweeps that measure the two-sided estimates numerically and turn
//! them into reports with witnesses, bands and verdicts.
//!
//! Every suite runs twice, on the configured grid and on one with doubled
//! density; a passing suite whose statistics drift by 5% or more between the
//! two is reported as unstable.

mod asymptotics;
mod halfspace;
mod polygon;
mod prop52;
mod thm41;
mod trace;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pencil::Pencil;
use crate::weights::ProductWeight;

pub use asymptotics::{sweep_group_asymptotics, AsymptoticsConfig};
pub use halfspace::{halfspace_bound, sweep_halfspace_ratio};
pub use polygon::sweep_polygon_equivalence;
pub use prop52::{multiplier_ratio, sweep_multiplier_rn};
pub use thm41::{reduced_rhs, sweep_theorem41, thm41_rhs};
pub use trace::{sweep_trace_equivalence, TraceTarget};

/// Relative change of a statistic under refinement that still counts as stable.
pub const STABILITY_DRIFT: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Geometric grid points per decade for |ξ'| and λ.
    pub per_decade: usize,
    /// Angular samples: quarter-circle θ and circle directions.
    pub angular: usize,
    /// Spherical nodes for n ≥ 3.
    pub sphere_nodes: usize,
    pub lambda0: f64,
    pub lambda_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub seed: u64,
    pub tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            per_decade: 8,
            angular: 720,
            sphere_nodes: 2000,
            lambda0: 1.0,
            lambda_max: 1e3,
            xi_min: 1e-2,
            xi_max: 1e2,
            seed: 0,
            tol: 1e-8,
        }
    }
}

impl GridSpec {
    pub fn refined(&self) -> GridSpec {
        GridSpec { per_decade: 2 * self.per_decade, angular: 2 * self.angular, sphere_nodes: 2 * self.sphere_nodes, ..self.clone() }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        geometric(self.lambda0, self.lambda_max, self.per_decade)
    }

    /// `|ξ'|` samples, starting with 0.
    pub fn xis_with_zero(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(geometric(self.xi_min, self.xi_max, self.per_decade));
        v
    }

    pub fn xis(&self) -> Vec<f64> {
        geometric(self.xi_min, self.xi_max, self.per_decade)
    }

    pub fn sphere(&self) -> crate::pencil::SphereGrid {
        crate::pencil::SphereGrid { angular: self.angular, nodes: self.sphere_nodes, seed: self.seed, tol: self.tol }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.per_decade >= 1
            && self.angular >= 4
            && self.lambda0 > 0.0
            && self.lambda_max >= self.lambda0
            && self.xi_min > 0.0
            && self.xi_max >= self.xi_min
            && self.tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid grid {self:?}")))
        }
    }
}

/// `lo·10^{k/K}` up to `hi`, endpoints included.
pub fn geometric(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=steps).map(|k| lo * (hi / lo).powf(k as f64 / steps as f64)).collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `log y` against `log x`; needs at least four points.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 4 || x.len() != y.len() {
        return Err(Error::InvalidInput(format!("slope fit needs at least 4 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(fit_slope(&lx, &ly))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub suite: String,
    pub xi_prime_abs: f64,
    pub lambda: f64,
    pub j: Option<u32>,
    pub l: Option<u32>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Record {
    pub fn new(suite: &str, xi: f64, lambda: f64, j: Option<u32>, l: Option<u32>, lhs: f64, rhs: f64) -> Self {
        Record { suite: suite.to_string(), xi_prime_abs: xi, lambda, j, l, lhs, rhs, ratio: lhs / rhs }
    }

    fn csv_line(&self) -> String {
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e}",
            self.suite,
            self.xi_prime_abs,
            self.lambda,
            opt(self.j),
            opt(self.l),
            self.lhs,
            self.rhs,
            self.ratio
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// Every ratio in `[lo, hi]`.
    Band { lo: f64, hi: f64 },
    /// `max ratio / min ratio ≤ max`.
    Width { max: f64 },
    /// Every ratio `≤ max`.
    Below { max: f64 },
    /// `|ratio − 1| ≤ tol` on every record.
    Limit { tol: f64 },
    /// The largest `lhs` at the top λ is below `abs_tol` or half the largest at the bottom λ.
    Decay { abs_tol: f64 },
    /// Verdict taken from the slope fits alone.
    Fits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitRelation {
    AtLeast,
    AtMost,
    Near,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub label: String,
    pub slope: f64,
    pub target: f64,
    pub tol: f64,
    pub relation: FitRelation,
    pub points: usize,
    pub ok: bool,
}

impl Fit {
    pub fn new(label: String, slope: f64, target: f64, tol: f64, relation: FitRelation, points: usize) -> Self {
        let ok = match relation {
            FitRelation::AtLeast => slope >= target - tol,
            FitRelation::AtMost => slope <= target + tol,
            FitRelation::Near => (slope - target).abs() <= tol,
        };
        Fit { label, slope, target, tol, relation, points, ok }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Unstable,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Unstable => "UNSTABLE",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Raw output of one sub-suite on one grid.
#[derive(Clone, Debug)]
pub struct SubData {
    pub name: String,
    pub criterion: Criterion,
    pub records: Vec<Record>,
    pub fits: Vec<Fit>,
    pub note: Option<String>,
}

impl SubData {
    pub fn new(name: &str, criterion: Criterion, records: Vec<Record>) -> Self {
        SubData { name: name.to_string(), criterion, records, fits: Vec::new(), note: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubReport {
    pub name: String,
    pub criterion: Criterion,
    pub count: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub witness_min: Option<Record>,
    pub witness_max: Option<Record>,
    pub fits: Vec<Fit>,
    /// Largest relative change of the statistics under grid refinement.
    pub drift: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub suite: String,
    pub config_hash: String,
    pub grid: GridSpec,
    pub subs: Vec<SubReport>,
    pub incidents: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub records: Vec<Record>,
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl SweepReport {
    pub fn sub(&self, name: &str) -> Option<&SubReport> {
        self.subs.iter().find(|s| s.name == name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(csv_text(&self.records).as_bytes())?;
        Ok(())
    }
}

pub const CSV_HEADER: &str = "suite,xi_prime_abs,lambda,j,l,lhs,rhs,ratio";

pub fn csv_text(records: &[Record]) -> String {
    let mut s = String::with_capacity(records.len() * 120);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

pub fn config_hash(value: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(value.to_string().as_bytes()))
}

fn statistics(sub: &SubData) -> (f64, f64, Option<Record>, Option<Record>) {
    let mut lo: Option<&Record> = None;
    let mut hi: Option<&Record> = None;
    for r in sub.records.iter().filter(|r| r.ratio.is_finite()) {
        if lo.map_or(true, |x| r.ratio < x.ratio) {
            lo = Some(r);
        }
        if hi.map_or(true, |x| r.ratio > x.ratio) {
            hi = Some(r);
        }
    }
    (
        lo.map_or(f64::NAN, |r| r.ratio),
        hi.map_or(f64::NAN, |r| r.ratio),
        lo.cloned(),
        hi.cloned(),
    )
}

fn judge(sub: &SubData, min: f64, max: f64) -> bool {
    let finite = sub.records.iter().all(|r| r.ratio.is_finite()) && !sub.records.is_empty();
    let fits_ok = sub.fits.iter().all(|f| f.ok);
    let crit = match sub.criterion {
        Criterion::Band { lo, hi } => finite && min >= lo && max <= hi,
        Criterion::Width { max: w } => finite && min > 0.0 && max / min <= w,
        Criterion::Below { max: b } => finite && max <= b,
        Criterion::Limit { tol } => finite && sub.records.iter().all(|r| (r.ratio - 1.0).abs() <= tol),
        Criterion::Decay { abs_tol } => {
            let lam_lo = sub.records.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min);
            let lam_hi = sub.records.iter().map(|r| r.lambda).fold(0.0, f64::max);
            let at = |lam: f64| {
                sub.records.iter().filter(|r| r.lambda == lam).map(|r| r.lhs).fold(0.0, f64::max)
            };
            let (first, last) = (at(lam_lo), at(lam_hi));
            !sub.records.is_empty() && (last <= abs_tol || last <= 0.5 * first)
        }
        Criterion::Fits => true,
    };
    crit && fits_ok
}

fn stat_vector(sub: &SubData, min: f64, max: f64) -> Vec<(f64, bool)> {
    // (value, is_slope)
    let mut v = match sub.criterion {
        Criterion::Band { .. } => vec![(min, false), (max, false)],
        Criterion::Width { .. } => vec![(max / min, false)],
        Criterion::Below { .. } => vec![(max, false)],
        Criterion::Limit { .. } | Criterion::Decay { .. } | Criterion::Fits => Vec::new(),
    };
    v.extend(sub.fits.iter().map(|f| (f.slope, true)));
    v
}

fn drift_between(a: &[(f64, bool)], b: &[(f64, bool)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&(x, slope), &(y, _))| {
            let den = if slope { x.abs().max(1.0) } else { x.abs().max(f64::MIN_POSITIVE) };
            (x - y).abs() / den
        })
        .fold(0.0, f64::max)
}

/// Builds the report from base-grid sub-suites and their refined
/// counterparts (matched by name).
pub fn assemble(
    suite: &str,
    grid: &GridSpec,
    hash: String,
    base: Vec<SubData>,
    refined: Option<Vec<SubData>>,
    incidents: Vec<String>,
    started: Instant,
) -> SweepReport {
    let mut subs = Vec::with_capacity(base.len());
    let mut records = Vec::new();
    for sub in &base {
        let (min, max, wmin, wmax) = statistics(sub);
        let pass = judge(sub, min, max);
        let drift = refined.as_ref().and_then(|r| r.iter().find(|x| x.name == sub.name)).map(|r| {
            let (rmin, rmax, _, _) = statistics(r);
            drift_between(&stat_vector(sub, min, max), &stat_vector(r, rmin, rmax))
        });
        let verdict = if !pass {
            Verdict::Fail
        } else if drift.map_or(false, |d| !(d < STABILITY_DRIFT)) {
            Verdict::Unstable
        } else {
            Verdict::Pass
        };
        subs.push(SubReport {
            name: sub.name.clone(),
            criterion: sub.criterion,
            count: sub.records.len(),
            min_ratio: min,
            max_ratio: max,
            witness_min: wmin,
            witness_max: wmax,
            fits: sub.fits.clone(),
            drift,
            verdict,
            note: sub.note.clone(),
        });
        records.extend(sub.records.iter().cloned());
    }
    let mut verdict = subs.iter().map(|s| s.verdict).max().unwrap_or(Verdict::Fail);
    if !incidents.is_empty() {
        verdict = verdict.max(Verdict::Fail);
    }
    SweepReport {
        suite: suite.to_string(),
        config_hash: hash,
        grid: grid.clone(),
        subs,
        incidents,
        verdict,
        records,
        runtime_ms: started.elapsed().as_millis(),
    }
}

/// Suites addressable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Polygon,
    Trace,
    Thm41,
    Asymptotics,
    Prop52,
    Halfspace,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Polygon, Suite::Trace, Suite::Thm41, Suite::Asymptotics, Suite::Prop52, Suite::Halfspace];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Polygon => "polygon",
            Suite::Trace => "trace",
            Suite::Thm41 => "thm41",
            Suite::Asymptotics => "asymptotics",
            Suite::Prop52 => "prop52",
            Suite::Halfspace => "halfspace",
        }
    }
}

/// Runs one suite for a pencil with the default per-suite parameters.
pub fn run_suite(suite: Suite, p: &Pencil, grid: &GridSpec) -> Result<SweepReport> {
    grid.validate()?;
    match suite {
        Suite::Polygon => {
            let np = p.newton_polygon()?;
            let energy = ProductWeight::energy(p.m as i64, p.mu as i64)?.with_lambda0(grid.lambda0);
            sweep_polygon_equivalence(&np, Some(&energy), grid)
        }
        Suite::Trace => {
            let energy = ProductWeight::energy(p.m as i64, p.mu as i64)?.with_lambda0(grid.lambda0);
            let poly_w = ProductWeight::from_polygon(&p.newton_polygon()?).with_lambda0(grid.lambda0);
            let targets = vec![
                TraceTarget::all_levels("trace.energy", energy),
                TraceTarget::all_levels("trace.polygon", poly_w),
            ];
            sweep_trace_equivalence(&targets, grid)
        }
        Suite::Thm41 => {
            let js: Vec<u32> = (1..=p.m).collect();
            let ls: Vec<u32> = (0..=p.m).collect();
            sweep_theorem41(p, grid, &js, &ls)
        }
        Suite::Asymptotics => sweep_group_asymptotics(p, &AsymptoticsConfig::default_for(grid), grid),
        Suite::Prop52 => sweep_multiplier_rn(p, grid),
        Suite::Halfspace => sweep_halfspace_ratio(p, grid),
    }
}

pub(crate) fn base_hash(suite: &str, p: Option<&Pencil>, grid: &GridSpec, extra: serde_json::Value) -> String {
    let pencil = p.and_then(|p| p.to_json().ok()).unwrap_or_default();
    config_hash(&serde_json::json!({
        "suite": suite,
        "pencil": pencil,
        "grid": grid,
        "extra": extra,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric(1.0, 1e3, 8);
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1.0);
        assert!((g[24] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn slope_fit_recovers_power() {
        let x: Vec<f64> = geometric(1.0, 1e3, 4);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        assert!((fit_loglog(&x, &y).unwrap() + 1.5).abs() < 1e-12);
        assert!(fit_loglog(&x[..3], &y[..3]).is_err());
    }

    #[test]
    fn csv_uses_fixed_formatting() {
        let r = Record::new("s", 0.5, 10.0, Some(1), None, 1.0, 3.0);
        let text = csv_text(&[r]);
        assert_eq!(
            text,
            "suite,xi_prime_abs,lambda,j,l,lhs,rhs,ratio\ns,5.0000000000000000e-1,1.0000000000000000e1,1,,1.0000000000000000e0,3.0000000000000000e0,3.3333333333333331e-1\n"
        );
    }

    #[test]
    fn verdicts_follow_criteria() {
        let recs = vec![
            Record::new("x", 1.0, 1.0, None, None, 1.0, 1.0),
            Record::new("x", 1.0, 2.0, None, None, 3.0, 1.0),
        ];
        let base = vec![SubData::new("x", Criterion::Band { lo: 0.5, hi: 2.0 }, recs.clone())];
        let r = assemble("x", &GridSpec::default(), String::new(), base, None, vec![], Instant::now());
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.subs[0].witness_max.as_ref().unwrap().lambda, 2.0);

        let base = vec![SubData::new("x", Criterion::Width { max: 4.0 }, recs.clone())];
        let mut moved = recs.clone();
        moved[1].ratio = 3.5;
        let refined = vec![SubData::new("x", Criterion::Width { max: 4.0 }, moved)];
        let r = assemble("x", &GridSpec::default(), String::new(), base, Some(refined), vec![], Instant::now());
        assert_eq!(r.verdict, Verdict::Unstable);
    }
}
