use std::time::Instant;

use rayon::prelude::*;

use super::{assemble, base_hash, geometric, Criterion, GridSpec, Record, SubData, SweepReport};
use crate::error::Result;
use crate::pencil::{directions, Pencil};

/// Largest acceptable value of the multiplier constant.
pub const PROP52_BOUND: f64 = 1e2;

/// Upper end of the `|ξ|` grid; the broken pencil peaks near `|ξ|² ≈ λ`.
const XI_TOP: f64 = 1e3;

/// `(1+|ξ|²)^μ (λ²+|ξ|²)^{m−μ}` over
/// `|A|² (1+|ξ|²)^{−μ} (λ²+|ξ|²)^{−(m−μ)} + λ^{2m−2μ}`, as `(numerator, denominator)`.
pub fn multiplier_ratio(m: u32, mu: u32, abs_a: f64, xi: f64, lambda: f64) -> (f64, f64) {
    let a = (1.0 + xi * xi).powi(mu as i32);
    let b = (lambda * lambda + xi * xi).powi((m - mu) as i32);
    let num = a * b;
    let den = abs_a * abs_a / (a * b) + lambda.powi(2 * (m - mu) as i32);
    (num, den)
}

/// Maximises the multiplier ratio over `|ξ| ∈ {0} ∪ [ξ_min, 1e3]`, all
/// sampled directions and `λ ∈ [λ₀, λ_max]`.
pub fn sweep_multiplier_rn(p: &Pencil, grid: &GridSpec) -> Result<SweepReport> {
    let started = Instant::now();
    grid.validate()?;
    let hash = base_hash("prop52", Some(p), grid, serde_json::json!({"xi_top": XI_TOP}));
    let base = compute(p, grid);
    let refined = compute(p, &grid.refined());
    Ok(assemble("prop52", grid, hash, base, Some(refined), Vec::new(), started))
}

fn compute(p: &Pencil, grid: &GridSpec) -> Vec<SubData> {
    let dirs = directions(p.n, &grid.sphere());
    let parts: Vec<_> = dirs.iter().map(|d| p.parts_at(d)).collect();
    let mut rhos = vec![0.0];
    rhos.extend(geometric(grid.xi_min, XI_TOP.max(grid.xi_max), grid.per_decade));
    let lambdas = grid.lambdas();
    let points: Vec<(f64, f64)> =
        rhos.iter().flat_map(|&x| lambdas.iter().map(move |&l| (x, l))).collect();
    let recs: Vec<Record> = points
        .par_iter()
        .map(|&(rho, lam)| {
            let mut best = (f64::NEG_INFINITY, 0.0, 1.0);
            for pa in &parts {
                let a = p.eval_radial(pa, rho, lam).norm();
                let (num, den) = multiplier_ratio(p.m, p.mu, a, rho, lam);
                if num / den > best.0 {
                    best = (num / den, num, den);
                }
            }
            Record::new("prop52", rho, lam, None, None, best.1, best.2)
        })
        .collect();
    vec![SubData::new("prop52", Criterion::Below { max: PROP52_BOUND }, recs)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::examples::{agmon, broken, e1};
    use crate::verify::Verdict;

    fn grid() -> GridSpec {
        GridSpec { per_decade: 4, angular: 90, ..GridSpec::default() }
    }

    #[test]
    fn closed_form_for_agmon() {
        // m = 1, μ = 0, |A| = 5 at ξ = 1, λ = 2: 5 / (25/5 + 4)
        let (n, d) = multiplier_ratio(1, 0, 5.0, 1.0, 2.0);
        assert!((n / d - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bounded_for_good_pencils_and_not_for_broken() {
        let r = sweep_multiplier_rn(&e1(2), &grid()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.subs[0].max_ratio < 3.0);
        let r = sweep_multiplier_rn(&agmon(2), &grid()).unwrap();
        assert!(r.subs[0].max_ratio <= 1.0 + 1e-12);
        let r = sweep_multiplier_rn(&broken(), &grid()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.subs[0].max_ratio > 1e2);
    }
}
