use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::thm41::xi_directions;
use super::{assemble, base_hash, fit_loglog, geometric, Criterion, Fit, FitRelation, GridSpec, Record, SubData, SweepReport};
use crate::error::{Error, Result};
use crate::halfline::{solve_roots, split_by_group};
use crate::pencil::Pencil;

/// Slope tolerance for every fitted exponent.
pub const SLOPE_TOL: f64 = 0.1;

/// Below this the measured distance is treated as exact and left out of fits.
const EXACT_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsConfig {
    /// λ values for the root-group limits (at least four).
    pub lambdas: Vec<f64>,
    pub xi_primes: Vec<f64>,
    /// `Λ` values on `|ω'| = 1` for the split-solution exponents.
    pub split_lambdas: Vec<f64>,
    /// Split exponents are fitted on `Λ ≥ fit_from`; smaller `Λ` are recorded only.
    pub fit_from: f64,
    pub ls: Vec<u32>,
}

impl AsymptoticsConfig {
    pub fn default_for(grid: &GridSpec) -> Self {
        AsymptoticsConfig {
            lambdas: geometric(10.0, grid.lambda_max.max(1e2), grid.per_decade),
            xi_primes: vec![1.0],
            split_lambdas: geometric(1.0, grid.lambda_max.max(1e2), grid.per_decade),
            fit_from: 10.0,
            ls: Vec::new(),
        }
    }

    fn densified(&self) -> Self {
        AsymptoticsConfig {
            lambdas: densify(&self.lambdas),
            xi_primes: self.xi_primes.clone(),
            split_lambdas: densify(&self.split_lambdas),
            fit_from: self.fit_from,
            ls: self.ls.clone(),
        }
    }
}

fn densify(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    for w in v.windows(2) {
        out.push(w[0]);
        out.push((w[0] * w[1]).sqrt());
    }
    out.extend(v.last());
    out
}

/// Limits of the two root groups as `λ → ∞` and the `Λ`-exponents of the
/// split solution norms.
pub fn sweep_group_asymptotics(p: &Pencil, cfg: &AsymptoticsConfig, grid: &GridSpec) -> Result<SweepReport> {
    let started = Instant::now();
    if cfg.lambdas.len() < 4 || cfg.split_lambdas.iter().filter(|&&x| x >= cfg.fit_from).count() < 4 {
        return Err(Error::InvalidInput("asymptotic fits need at least 4 λ points".into()));
    }
    if cfg.xi_primes.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidInput("|ξ'| values must be positive".into()));
    }
    let hash = base_hash("asymptotics", Some(p), grid, serde_json::to_value(cfg)?);
    let (base, incidents) = compute(p, cfg, grid.seed)?;
    let (refined, _) = compute(p, &cfg.densified(), grid.seed)?;
    Ok(assemble("asymptotics", grid, hash, base, Some(refined), incidents, started))
}

fn compute(p: &Pencil, cfg: &AsymptoticsConfig, seed: u64) -> Result<(Vec<SubData>, Vec<String>)> {
    let omega = xi_directions(p.n, seed)?.swap_remove(0);
    let mut incidents = Vec::new();
    let mut subs = Vec::new();

    let jobs: Vec<(f64, f64)> =
        cfg.xi_primes.iter().flat_map(|&x| cfg.lambdas.iter().map(move |&l| (x, l))).collect();
    let groupings: Vec<_> = jobs
        .par_iter()
        .map(|&(xi, lam)| {
            let xp: Vec<f64> = omega.iter().map(|w| w * xi).collect();
            p.group_roots(&xp, lam)
        })
        .collect();

    let mut bounded = Vec::new();
    let mut puiseux = Vec::new();
    let mut k1 = 1usize;
    for (&(xi, lam), g) in jobs.iter().zip(&groupings) {
        let g = match g {
            Ok(g) => g,
            Err(e) => {
                incidents.push(format!("grouping at |ξ'| = {xi:e}, λ = {lam:e}: {e}"));
                continue;
            }
        };
        k1 = g.k1.max(1);
        if !g.group_bounded.is_empty() {
            let d = g.group_bounded.iter().map(|&r| g.residuals[r]).fold(0.0, f64::max);
            bounded.push(Record::new("asymptotics.bounded", xi, lam, None, None, d, 1.0));
        }
        for (q, &r) in g.group_large.iter().enumerate() {
            let rhs = (xi / lam).powf(1.0 / g.k1.max(1) as f64);
            puiseux.push(Record::new("asymptotics.puiseux", xi, lam, Some(q as u32 + 1), None, g.residuals[r] / lam, rhs));
        }
    }
    if !bounded.is_empty() {
        subs.push(SubData::new("asymptotics.bounded", Criterion::Decay { abs_tol: 1e-8 }, bounded));
    }

    let mut sub = SubData::new("asymptotics.puiseux", Criterion::Fits, Vec::new());
    let target = 1.0 / k1 as f64;
    let mut exact = 0usize;
    for &xi in &cfg.xi_primes {
        let roots: Vec<u32> = puiseux.iter().filter_map(|r| r.j).max().into_iter().flat_map(|m| 1..=m).collect();
        for q in roots {
            let pts: Vec<&Record> =
                puiseux.iter().filter(|r| r.xi_prime_abs == xi && r.j == Some(q) && r.lhs > EXACT_FLOOR).collect();
            if pts.len() < 4 {
                exact += 1;
                continue;
            }
            let x: Vec<f64> = pts.iter().map(|r| xi / r.lambda).collect();
            let y: Vec<f64> = pts.iter().map(|r| r.lhs).collect();
            let slope = fit_loglog(&x, &y)?;
            let label = format!("|ξ'|={xi} root {q}: |τ/λ − τ¹| vs |ξ'|/λ");
            sub.fits.push(Fit::new(label, slope, target, SLOPE_TOL, FitRelation::AtLeast, pts.len()));
        }
    }
    if exact > 0 {
        sub.note = Some(format!("{exact} large-group root(s) matched their limit to within {EXACT_FLOOR:e}"));
    }
    if !puiseux.is_empty() {
        sub.records = puiseux;
        subs.push(sub);
    }

    let (split, inc) = split_norms(p, &omega, cfg)?;
    subs.extend(split);
    incidents.extend(inc);
    Ok((subs, incidents))
}

/// Predicted `Λ`-exponent of `‖D^l w_j^{(g)}‖` on `|ω'| = 1`.
pub fn split_exponent(group: u8, j: u32, l: u32, mu: u32) -> f64 {
    let (j, l, mu) = (j as f64, l as f64, mu as f64);
    match (group, j <= mu) {
        (1, true) => 0.0,
        (1, false) => mu - j,
        (_, true) => l - mu - 0.5,
        (_, false) => l - j + 0.5,
    }
}

fn split_norms(p: &Pencil, omega: &[f64], cfg: &AsymptoticsConfig) -> Result<(Vec<SubData>, Vec<String>)> {
    let ls: Vec<u32> = if cfg.ls.is_empty() { (0..=p.m).collect() } else { cfg.ls.clone() };
    let js: Vec<u32> = (1..=p.m).collect();
    let per_point: Vec<_> = cfg
        .split_lambdas
        .par_iter()
        .map(|&bl| -> Result<Vec<(u32, u32, f64, f64)>> {
            let g = p.group_roots(omega, bl)?;
            let sols = solve_roots(&g.upper_roots)?;
            let mut v = Vec::new();
            for &j in &js {
                let (w1, w2) = split_by_group(&sols[j as usize - 1], &g)?;
                for &l in &ls {
                    v.push((j, l, w1.l2_norm_deriv(l as usize), w2.l2_norm_deriv(l as usize)));
                }
            }
            Ok(v)
        })
        .collect();

    let mut incidents = Vec::new();
    let mut recs1 = Vec::new();
    let mut recs2 = Vec::new();
    for (&bl, res) in cfg.split_lambdas.iter().zip(per_point) {
        match res {
            Ok(v) => {
                for (j, l, n1, n2) in v {
                    if p.mu > 0 {
                        recs1.push(Record::new("asymptotics.split1", 1.0, bl, Some(j), Some(l), n1, bl.powf(split_exponent(1, j, l, p.mu))));
                    }
                    recs2.push(Record::new("asymptotics.split2", 1.0, bl, Some(j), Some(l), n2, bl.powf(split_exponent(2, j, l, p.mu))));
                }
            }
            Err(e) => incidents.push(format!("split at Λ = {bl:e}: {e}")),
        }
    }

    let mut out = Vec::new();
    for (group, recs) in [(1u8, recs1), (2u8, recs2)] {
        if recs.is_empty() {
            continue;
        }
        let name = format!("asymptotics.split{group}");
        let mut sub = SubData::new(&name, Criterion::Fits, Vec::new());
        let mut skipped = Vec::new();
        for &j in &js {
            for &l in &ls {
                let pts: Vec<&Record> =
                    recs.iter().filter(|r| r.j == Some(j) && r.l == Some(l) && r.lhs > 0.0 && r.lambda >= cfg.fit_from).collect();
                if pts.len() < 4 {
                    skipped.push(format!("j={j} l={l}"));
                    continue;
                }
                let x: Vec<f64> = pts.iter().map(|r| r.lambda).collect();
                let y: Vec<f64> = pts.iter().map(|r| r.lhs).collect();
                let slope = fit_loglog(&x, &y)?;
                let target = split_exponent(group, j, l, p.mu);
                sub.fits.push(Fit::new(format!("w{group} j={j} l={l}"), slope, target, SLOPE_TOL, FitRelation::AtMost, pts.len()));
            }
        }
        if !skipped.is_empty() {
            sub.note = Some(format!("identically zero: {}", skipped.join(", ")));
        }
        sub.records = recs;
        out.push(sub);
    }
    Ok((out, incidents))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::examples::e1;
    use crate::verify::Verdict;

    #[test]
    fn densify_inserts_geometric_midpoints() {
        let d = densify(&[1.0, 100.0, 1e4]);
        assert_eq!(d.len(), 5);
        assert!((d[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn e1_exponents_are_sharp() {
        let grid = GridSpec { per_decade: 2, ..GridSpec::default() };
        let cfg = AsymptoticsConfig::default_for(&grid);
        let r = sweep_group_asymptotics(&e1(2), &cfg, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:#?}", r.subs);
        let p = r.sub("asymptotics.puiseux").unwrap();
        assert!((p.fits[0].slope - 2.0).abs() < 0.05, "{:?}", p.fits);
        let s2 = r.sub("asymptotics.split2").unwrap();
        for f in &s2.fits {
            assert!((f.slope - f.target).abs() < 0.1, "{f:?}");
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let grid = GridSpec::default();
        let mut cfg = AsymptoticsConfig::default_for(&grid);
        cfg.lambdas.truncate(3);
        assert!(sweep_group_asymptotics(&e1(2), &cfg, &grid).is_err());
    }
}
