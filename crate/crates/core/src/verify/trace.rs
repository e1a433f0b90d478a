use std::time::Instant;

use rayon::prelude::*;

use super::{assemble, config_hash, Criterion, GridSpec, Record, SubData, SweepReport};
use crate::error::Result;
use crate::polygon::Rational;
use crate::weights::{half_shift, trace_weight_quadrature, ProductWeight};

/// One weight and the trace orders `l` swept for it.
#[derive(Clone, Debug)]
pub struct TraceTarget {
    pub name: String,
    pub weight: ProductWeight,
    pub levels: Vec<u32>,
}

impl TraceTarget {
    /// Every `l` with `l < 2Σm`.
    pub fn all_levels(name: &str, weight: ProductWeight) -> Self {
        let top = (Rational::from_integer(2) * weight.total_exponent()).ceil().to_integer().max(0) as u32;
        TraceTarget { name: name.to_string(), weight, levels: (0..top).collect() }
    }
}

/// `σ'_l(ξ', λ) / Ξ^{(−l−1/2)}(ξ', λ)` over the grid; each target must stay
/// within a single band of width `1e2` across all its levels.
pub fn sweep_trace_equivalence(targets: &[TraceTarget], grid: &GridSpec) -> Result<SweepReport> {
    let started = Instant::now();
    grid.validate()?;
    let hash = config_hash(&serde_json::json!({
        "suite": "trace",
        "targets": targets.iter().map(|t| serde_json::json!({"name": t.name, "weight": t.weight, "levels": t.levels})).collect::<Vec<_>>(),
        "grid": grid,
    }));
    let base = compute(targets, grid)?;
    let refined = compute(targets, &grid.refined())?;
    Ok(assemble("trace", grid, hash, base, Some(refined), Vec::new(), started))
}

fn compute(targets: &[TraceTarget], grid: &GridSpec) -> Result<Vec<SubData>> {
    let xis = grid.xis_with_zero();
    let lambdas = grid.lambdas();
    let mut subs = Vec::new();
    for t in targets {
        let w = t.weight.clone().with_lambda0(grid.lambda0);
        let shifted: Vec<ProductWeight> =
            t.levels.iter().map(|&l| w.shift(half_shift(l))).collect::<Result<_>>()?;
        let mut jobs: Vec<(usize, f64, f64)> = Vec::new();
        for i in 0..t.levels.len() {
            for &x in &xis {
                jobs.extend(lambdas.iter().map(|&lam| (i, x, lam)));
            }
        }
        let recs: Vec<Record> = jobs
            .par_iter()
            .map(|&(i, xi, lam)| {
                let l = t.levels[i];
                let sigma = trace_weight_quadrature(&w, l, xi, lam)?;
                Ok(Record::new(&t.name, xi, lam, None, Some(l), sigma, shifted[i].eval(xi, lam)))
            })
            .collect::<Result<_>>()?;
        subs.push(SubData::new(&t.name, Criterion::Width { max: 1e2 }, recs));
    }
    Ok(subs)
}
