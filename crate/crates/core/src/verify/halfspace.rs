use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;

use super::thm41::{check_indices, norms_max, thm41_rhs, xi_directions};
use super::{assemble, base_hash, Criterion, GridSpec, Record, SubData, SweepReport};
use crate::error::Result;
use crate::pencil::Pencil;
use crate::polygon::{Rational, Slope};
use crate::weights::{Factor, HomogeneousWeight};

/// Bound assumed for the constant in the weight-ratio estimate.
pub const HALFSPACE_BOUND: f64 = 1e2;

fn phi(m: u32, mu: u32) -> Result<HomogeneousWeight> {
    let mut f = Vec::new();
    if mu > 0 {
        f.push(Factor::new(Slope::Infinite, Ratio::new(mu as i64, 2)));
    }
    f.push(Factor::new(Slope::integer(1), Ratio::new((m - mu) as i64, 2)));
    HomogeneousWeight::new(f)
}

/// `Φ^{(−j+1/2)}(ξ', λ) / Φ^{(−l)}(ξ', λ)` for the homogeneous energy weight
/// `Φ ≈ |ξ|^μ (λ + |ξ|)^{m−μ}`.
pub fn halfspace_bound(m: u32, mu: u32, j: u32, l: u32, xi: f64, lambda: f64) -> Result<f64> {
    let w = phi(m, mu)?;
    let top = w.shift(Ratio::new(2 * j as i64 - 1, 2))?;
    let bottom = w.shift_inclusive(Rational::from_integer(l as i64))?;
    Ok(top.eval(xi, lambda) / bottom.eval(xi, lambda))
}

/// `‖D_t^l w_j‖` against the homogeneous weight ratio, plus the comparison of
/// that ratio with the tabulated right-hand side.
pub fn sweep_halfspace_ratio(p: &Pencil, grid: &GridSpec) -> Result<SweepReport> {
    let started = Instant::now();
    grid.validate()?;
    let js: Vec<u32> = (1..=p.m).collect();
    let ls: Vec<u32> = (0..=p.m).collect();
    check_indices(p, &js, &ls)?;
    let hash = base_hash("halfspace", Some(p), grid, serde_json::Value::Null);
    let (base, incidents) = compute(p, grid, &js, &ls)?;
    let (refined, _) = compute(p, &grid.refined(), &js, &ls)?;
    Ok(assemble("halfspace", grid, hash, base, Some(refined), incidents, started))
}

fn compute(p: &Pencil, grid: &GridSpec, js: &[u32], ls: &[u32]) -> Result<(Vec<SubData>, Vec<String>)> {
    let dirs = xi_directions(p.n, grid.seed)?;
    let xis = grid.xis();
    let lambdas = grid.lambdas();
    let points: Vec<(f64, f64)> =
        xis.iter().flat_map(|&x| lambdas.iter().map(move |&l| (x, l))).collect();
    let norms: Vec<_> = points.par_iter().map(|&(xi, lam)| norms_max(p, &dirs, xi, lam, js, ls)).collect();
    let mut recs = Vec::new();
    let mut table = Vec::new();
    let mut incidents = Vec::new();
    for (&(xi, lam), res) in points.iter().zip(&norms) {
        let n = match res {
            Ok(n) => n,
            Err(e) => {
                incidents.push(format!("|ξ'| = {xi:e}, λ = {lam:e}: {e}"));
                continue;
            }
        };
        for (a, &j) in js.iter().enumerate() {
            for (b, &l) in ls.iter().enumerate() {
                let bound = halfspace_bound(p.m, p.mu, j, l, xi, lam)?;
                recs.push(Record::new("halfspace", xi, lam, Some(j), Some(l), n[a][b], bound));
                let rhs = thm41_rhs(j, l, p.mu, xi, lam);
                table.push(Record::new("halfspace.table", xi, lam, Some(j), Some(l), rhs, bound));
            }
        }
    }
    Ok((
        vec![
            SubData::new("halfspace", Criterion::Below { max: HALFSPACE_BOUND }, recs),
            SubData::new("halfspace.table", Criterion::Below { max: 4.0 }, table),
        ],
        incidents,
    ))
}
