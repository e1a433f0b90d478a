use std::time::Instant;

use rayon::prelude::*;

use super::{assemble, config_hash, Criterion, GridSpec, Record, SubData, SweepReport};
use crate::error::Result;
use crate::polygon::{ratio_to_f64, Degree, NewtonPolygon, Rational, Slope};
use crate::weights::{xi_sum_eval, ProductWeight};

const SCALING_SAMPLES: [(f64, f64); 3] = [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)];

/// Sum/product equivalence, the ξ_n-binomial identity, the scaling limit of
/// every finite side and (when given) the match with an energy weight.
pub fn sweep_polygon_equivalence(
    np: &NewtonPolygon,
    energy: Option<&ProductWeight>,
    grid: &GridSpec,
) -> Result<SweepReport> {
    let started = Instant::now();
    grid.validate()?;
    let hash = config_hash(&serde_json::json!({
        "suite": "polygon",
        "polygon": np.chain(),
        "energy": energy,
        "grid": grid,
    }));
    let base = compute(np, energy, grid)?;
    let refined = compute(np, energy, &grid.refined())?;
    Ok(assemble("polygon", grid, hash, base, Some(refined), Vec::new(), started))
}

fn compute(np: &NewtonPolygon, energy: Option<&ProductWeight>, grid: &GridSpec) -> Result<Vec<SubData>> {
    let w = ProductWeight::from_polygon(np).with_lambda0(grid.lambda0);
    let xis = grid.xis_with_zero();
    let lambdas = grid.lambdas();
    let points: Vec<(f64, f64)> =
        xis.iter().flat_map(|&x| lambdas.iter().map(move |&l| (x, l))).collect();

    let mut subs = Vec::new();

    let recs: Vec<Record> = points
        .par_iter()
        .map(|&(xi, lam)| Record::new("polygon.sum_product", xi, lam, None, None, xi_sum_eval(np, xi, lam), w.eval(xi, lam)))
        .collect();
    subs.push(SubData::new("polygon.sum_product", Criterion::Width { max: 1e2 }, recs));

    subs.push(binomial(&w, grid, &points)?);

    if let Some(s) = scaling(np, &w)? {
        subs.push(s);
    }

    if let Some(e) = energy {
        let recs: Vec<Record> = points
            .par_iter()
            .map(|&(xi, lam)| {
                let ew = e.eval(xi, lam);
                Record::new("polygon.energy", xi, lam, None, None, xi_sum_eval(np, xi, lam), ew * ew)
            })
            .collect();
        subs.push(SubData::new("polygon.energy", Criterion::Width { max: 1e2 }, recs));
    }
    Ok(subs)
}

/// `Ξ²(ξ', ξ_n)` against `Σ_l ξ_n^{2l} (Ξ^{(−l)}(ξ'))²`; the `l` column
/// holds the index of `ξ_n` in its sample list.
fn binomial(w: &ProductWeight, grid: &GridSpec, points: &[(f64, f64)]) -> Result<SubData> {
    let top = (Rational::from_integer(2) * w.total_exponent()).to_integer();
    let shifted: Vec<ProductWeight> =
        (0..=top).map(|l| w.shift_inclusive(Rational::from_integer(l))).collect::<Result<_>>()?;
    let mut xns = vec![0.0];
    xns.extend(super::geometric(grid.xi_min, grid.xi_max, (grid.per_decade / 4).max(1)));
    let recs: Vec<Record> = points
        .par_iter()
        .flat_map_iter(|&(xi, lam)| {
            let shifted = &shifted;
            xns.iter().enumerate().map(move |(idx, &xn)| {
                let full = w.eval((xi * xi + xn * xn).sqrt(), lam);
                let sum: f64 = shifted
                    .iter()
                    .enumerate()
                    .map(|(l, sw)| xn.powi(2 * l as i32) * sw.eval(xi, lam).powi(2))
                    .sum();
                Record::new("polygon.binomial", xi, lam, None, Some(idx as u32), full * full, sum)
            })
        })
        .collect();
    Ok(SubData::new("polygon.binomial", Criterion::Width { max: 1e2 }, recs))
}

/// `Ξ_P(tξ, t^r λ)/t^{d}` against the side sum at the largest usable `t`.
/// Columns: `xi_prime_abs = |ξ|`, `j` = side index, `l = log10 t`.
fn scaling(np: &NewtonPolygon, w: &ProductWeight) -> Result<Option<SubData>> {
    let pts = np.integer_points();
    let mut recs = Vec::new();
    let mut notes = Vec::new();
    for (idx, side) in np.sides().iter().enumerate() {
        let (r, d) = match (side.r, side.degree) {
            (Slope::Finite(r), Degree::Finite(d)) => (r, d),
            _ => continue,
        };
        let s = idx + 1;
        let predicted = w.side_degree(s, false)?;
        let alternative = w.side_degree(s, true)?;
        notes.push(format!("side {s}: r = {r}, d = {d}, factor formula {predicted}, m_s reading {alternative}"));
        let rf = ratio_to_f64(r);
        let df = ratio_to_f64(d);
        let reach = pts.iter().map(|p| p.i as f64 + rf * p.k as f64).fold(1.0, f64::max);
        let log_t = (280.0 / reach).min(8.0).floor().max(1.0) as u32;
        let t = 10f64.powi(log_t as i32);
        for &(xi, lam) in &SCALING_SAMPLES {
            let lhs = xi_sum_eval(np, t * xi, t.powf(rf) * lam) / t.powf(df);
            let rhs: f64 = pts
                .iter()
                .filter(|p| side.contains(**p))
                .map(|p| xi.powi(p.i as i32) * lam.powi(p.k as i32))
                .sum();
            recs.push(Record::new("polygon.scaling", xi, lam, Some(s as u32), Some(log_t), lhs, rhs));
        }
    }
    if recs.is_empty() {
        return Ok(None);
    }
    let mut sub = SubData::new("polygon.scaling", Criterion::Limit { tol: 0.1 }, recs);
    sub.note = Some(notes.join("; "));
    Ok(Some(sub))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Verdict;

    fn small() -> GridSpec {
        GridSpec { per_decade: 2, ..GridSpec::default() }
    }

    #[test]
    fn e1_polygon_passes_every_sub_suite() {
        let np = NewtonPolygon::from_pairs(&[(4, 0), (2, 2)]).unwrap();
        let e = ProductWeight::energy(2, 1).unwrap();
        let r = sweep_polygon_equivalence(&np, Some(&e), &small()).unwrap();
        for s in &r.subs {
            assert_eq!(s.verdict, Verdict::Pass, "{s:?}");
        }
        let sp = r.sub("polygon.sum_product").unwrap();
        assert!(sp.min_ratio >= 0.1 && sp.max_ratio <= 10.0);
    }

    #[test]
    fn three_sided_polygon_scales_on_each_side() {
        let np = NewtonPolygon::from_pairs(&[(0, 3), (2, 2), (5, 1), (9, 0)]).unwrap();
        let r = sweep_polygon_equivalence(&np, None, &small()).unwrap();
        let s = r.sub("polygon.scaling").unwrap();
        assert_eq!(s.verdict, Verdict::Pass, "{s:?}");
    }
}
