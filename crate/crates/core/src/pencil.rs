//! Operator pencils `A(ξ, λ) = Σ_j λ^{2m−j} A_j(ξ)` with homogeneous parts
//! `A_j` of degree `j`, `2μ ≤ j ≤ 2m`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{self, RootCluster, C64};
use crate::polygon::{radial_monomials, LatticePoint, NewtonPolygon};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub j: u32,
    pub coeff: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub n: usize,
    pub m: u32,
    pub mu: u32,
    pub terms: Vec<Term>,
    /// Non-fatal irregularities, such as a missing `j = 2m` or `j = 2μ` part.
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    alpha: Vec<u32>,
    j: u32,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PencilFile {
    n: usize,
    m: u32,
    mu: u32,
    terms: Vec<TermFile>,
}

impl Pencil {
    /// Validates and canonicalizes: equal multi-indices are summed and terms
    /// are ordered by `(j, α)`.
    pub fn new(n: usize, m: u32, mu: u32, terms: Vec<Term>) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedPencil("dimension n must be at least 1".into()));
        }
        if m <= mu {
            return Err(Error::MalformedPencil(format!("need m > mu, got m={m}, mu={mu}")));
        }
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            if t.alpha.len() != n {
                return Err(Error::MalformedPencil(format!(
                    "multi-index {:?} has length {}, expected {n}",
                    t.alpha,
                    t.alpha.len()
                )));
            }
            let deg: u32 = t.alpha.iter().sum();
            if deg != t.j {
                return Err(Error::MalformedPencil(format!(
                    "term {:?} has |alpha| = {deg} but j = {}",
                    t.alpha, t.j
                )));
            }
            if t.j < 2 * mu || t.j > 2 * m {
                return Err(Error::MalformedPencil(format!(
                    "j = {} outside [{}, {}]",
                    t.j,
                    2 * mu,
                    2 * m
                )));
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::MalformedPencil(format!("non-finite coefficient in {:?}", t.alpha)));
            }
            match merged.iter_mut().find(|x| x.alpha == t.alpha) {
                Some(x) => x.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        merged.sort_by(|a, b| a.j.cmp(&b.j).then_with(|| a.alpha.cmp(&b.alpha)));
        let mut warnings = Vec::new();
        for (j, name) in [(2 * m, "2m"), (2 * mu, "2mu")] {
            if !merged.iter().any(|t| t.j == j) {
                warnings.push(format!("no term with j = {name} = {j}; pencil is degenerate"));
            }
        }
        Ok(Pencil { n, m, mu, terms: merged, warnings })
    }

    /// `Σ c_j |ξ|^j λ^{2m−j}` over even `j`, expanded into monomials.
    pub fn from_radial(n: usize, m: u32, mu: u32, parts: &[(u32, C64)]) -> Result<Self> {
        let mut terms = Vec::new();
        for &(j, c) in parts {
            if j % 2 != 0 {
                return Err(Error::InvalidInput(format!("radial part needs even j, got {j}")));
            }
            for mono in radial_monomials(n, j / 2, 2 * m - j, c) {
                terms.push(Term { alpha: mono.alpha, j, coeff: mono.coeff });
            }
        }
        Pencil::new(n, m, mu, terms)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PencilFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedPencil(e.to_string()))?;
        let terms = file
            .terms
            .into_iter()
            .map(|t| Term { alpha: t.alpha, j: t.j, coeff: C64::new(t.re, t.im) })
            .collect();
        Pencil::new(file.n, file.m, file.mu, terms)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Pencil::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PencilFile {
            n: self.n,
            m: self.m,
            mu: self.mu,
            terms: self
                .terms
                .iter()
                .map(|t| TermFile { alpha: t.alpha.clone(), j: t.j, re: t.coeff.re, im: t.coeff.im })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    fn check_dim(&self, len: usize, expected: usize) -> Result<()> {
        if len != expected {
            return Err(Error::DimensionMismatch { expected, got: len });
        }
        Ok(())
    }

    pub fn eval(&self, xi: &[f64], lambda: f64) -> Result<C64> {
        self.check_dim(xi.len(), self.n)?;
        Ok(self
            .terms
            .iter()
            .map(|t| t.coeff * monomial(&t.alpha, xi) * lambda.powi((2 * self.m - t.j) as i32))
            .sum())
    }

    /// The homogeneous part `A_j(ξ)`.
    pub fn eval_part(&self, j: u32, xi: &[f64]) -> Result<C64> {
        self.check_dim(xi.len(), self.n)?;
        Ok(self.terms.iter().filter(|t| t.j == j).map(|t| t.coeff * monomial(&t.alpha, xi)).sum())
    }

    /// `(A_{2μ}(ω), …, A_{2m}(ω))`, so that
    /// `A(ρω, λ) = Σ_j ρ^j λ^{2m−j} A_j(ω)`.
    pub fn parts_at(&self, omega: &[f64]) -> Vec<C64> {
        let mut parts = vec![C64::zero(); (2 * (self.m - self.mu) + 1) as usize];
        for t in &self.terms {
            parts[(t.j - 2 * self.mu) as usize] += t.coeff * monomial(&t.alpha, omega);
        }
        parts
    }

    /// `A(ρω, λ)` from precomputed [`parts_at`](Self::parts_at) values.
    pub fn eval_radial(&self, parts: &[C64], rho: f64, lambda: f64) -> C64 {
        parts
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                let j = 2 * self.mu as i32 + idx as i32;
                a * rho.powi(j) * lambda.powi(2 * self.m as i32 - j)
            })
            .sum()
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn support(&self) -> Vec<LatticePoint> {
        let mut pts: Vec<LatticePoint> = self
            .terms
            .iter()
            .map(|t| LatticePoint::new(t.j as i64, (2 * self.m - t.j) as i64))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    pub fn newton_polygon(&self) -> Result<NewtonPolygon> {
        let mut pts = self.support();
        if pts.is_empty() {
            pts.push(LatticePoint::ORIGIN);
        }
        NewtonPolygon::build(&pts)
    }

    /// Ascending coefficients of `τ ↦ A(ξ', τ, λ)`.
    pub fn tau_polynomial(&self, xi_prime: &[f64], lambda: f64) -> Result<Vec<C64>> {
        self.check_dim(xi_prime.len(), self.n - 1)?;
        let deg = 2 * self.m as usize;
        let mut c = vec![C64::zero(); deg + 1];
        for t in &self.terms {
            let k = t.alpha[self.n - 1] as usize;
            c[k] += t.coeff
                * monomial(&t.alpha[..self.n - 1], xi_prime)
                * lambda.powi((2 * self.m - t.j) as i32);
        }
        if c[deg].norm() <= 1e-14 * self.coefficient_scale() {
            return Err(Error::NotEllipticInXiN(c[deg].norm()));
        }
        Ok(c)
    }

    /// Ascending coefficients of `τ ↦ A_{2μ}(ξ', τ)`.
    pub fn low_part_tau_polynomial(&self, xi_prime: &[f64]) -> Result<Vec<C64>> {
        self.check_dim(xi_prime.len(), self.n - 1)?;
        let mut c = vec![C64::zero(); 2 * self.mu as usize + 1];
        for t in self.terms.iter().filter(|t| t.j == 2 * self.mu) {
            c[t.alpha[self.n - 1] as usize] += t.coeff * monomial(&t.alpha[..self.n - 1], xi_prime);
        }
        Ok(c)
    }

    /// `Q(τ) = τ^{−2μ} A(0, τ, 1)`, ascending, degree `2m − 2μ`.
    pub fn q_polynomial(&self) -> Result<Vec<C64>> {
        let zero = vec![0.0; self.n - 1];
        let full = self.tau_polynomial(&zero, 1.0)?;
        let low = 2 * self.mu as usize;
        let scale = full.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if let Some(k) = (0..low).find(|&k| full[k].norm() > 1e-14 * scale) {
            return Err(Error::MalformedPencil(format!(
                "A(0,τ,1) has a nonzero τ^{k} coefficient below τ^{low}"
            )));
        }
        Ok(full[low..].to_vec())
    }

    /// Samples the three ellipticity conditions on the sphere, and estimates
    /// the constant in `|A| ≥ C|ξ|^{2μ}(λ+|ξ|)^{2m−2μ}`.
    pub fn check_lemma21(&self, grid: &SphereGrid) -> EllipticityReport {
        let dirs = directions(self.n, grid);
        let parts: Vec<Vec<C64>> = dirs.iter().map(|w| self.parts_at(w)).collect();
        let scale = parts
            .iter()
            .flat_map(|p| p.iter().map(|a| a.norm()))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = grid.tol * scale;
        let top = parts[0].len() - 1;

        let cond_i = sphere_condition(&dirs, &parts, top, tol);
        let cond_ii = sphere_condition(&dirs, &parts, 0, tol);

        // (iii) on |ξ|=cos θ, λ=sin θ, θ∈[0,π/2); |A|/|ξ|^{2μ} keeps the
        // limit ξ→0 visible instead of vanishing with it.
        let thetas: Vec<f64> = (0..grid.angular).map(|k| FRAC_PI_2 * k as f64 / grid.angular as f64).collect();
        let per_dir: Vec<(f64, usize, f64, usize)> = parts
            .par_iter()
            .map(|p| {
                let mut best_a = (f64::INFINITY, 0usize);
                let mut best_c = (f64::INFINITY, 0usize);
                for (ti, &th) in thetas.iter().enumerate() {
                    let (rho, lam) = (th.cos(), th.sin());
                    let a = self.eval_radial(p, rho, lam).norm();
                    let low = rho.powi(2 * self.mu as i32);
                    let v = a / low;
                    let c = v / (lam + rho).powi(2 * (self.m - self.mu) as i32);
                    if v < best_a.0 {
                        best_a = (v, ti);
                    }
                    if c < best_c.0 {
                        best_c = (c, ti);
                    }
                }
                (best_a.0, best_a.1, best_c.0, best_c.1)
            })
            .collect();
        let mut iii = (f64::INFINITY, 0usize, 0usize);
        let mut cmin = (f64::INFINITY, 0usize, 0usize);
        let mut first_bad: Option<(usize, usize)> = None;
        for (d, &(a, ta, c, tc)) in per_dir.iter().enumerate() {
            if a < iii.0 {
                iii = (a, d, ta);
            }
            if c < cmin.0 {
                cmin = (c, d, tc);
            }
            if a <= tol && first_bad.is_none() {
                first_bad = Some((d, ta));
            }
        }
        let (wd, wt) = first_bad.unwrap_or((iii.1, iii.2));
        let th = thetas[wt];
        let cond_iii = ConditionCheck {
            holds: iii.0 > tol,
            min_value: iii.0,
            witness: dirs[wd].iter().map(|x| x * th.cos()).collect(),
            witness_lambda: Some(th.sin()),
        };
        let all = cond_i.holds && cond_ii.holds && cond_iii.holds;
        let thc = thetas[cmin.2];
        EllipticityReport {
            cond_i,
            cond_ii,
            cond_iii,
            c_est: if all { cmin.0 } else { 0.0 },
            c_witness: dirs[cmin.1].iter().map(|x| x * thc.cos()).collect(),
            c_witness_lambda: thc.sin(),
            directions: dirs.len(),
            angular: grid.angular,
            tol,
        }
    }

    /// Minimum of `|A|/(|ξ|^{2μ}(λ+|ξ|)^{2m−2μ})` over fresh random samples.
    pub fn sampled_lower_ratio(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = f64::INFINITY;
        for _ in 0..samples {
            let w = random_direction(self.n, &mut rng);
            let th: f64 = rng.gen_range(0.0..FRAC_PI_2);
            let (rho, lam) = (th.cos(), th.sin());
            let a = self.eval_radial(&self.parts_at(&w), rho, lam).norm();
            let den = rho.powi(2 * self.mu as i32) * (rho + lam).powi(2 * (self.m - self.mu) as i32);
            best = best.min(a / den);
        }
        best
    }

    pub fn check_regular_degeneration(&self) -> Result<DegenerationReport> {
        let q = self.q_polynomial()?;
        let expected = (self.m - self.mu) as usize;
        let clusters = poly::roots_clustered(&q)?;
        let scale = clusters.iter().map(|c| c.root.norm()).fold(1.0, f64::max);
        let real_tol = 1e-6 * scale;
        let q0 = q[0].norm();
        let qscale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let on_axis: Vec<C64> =
            clusters.iter().filter(|c| c.root.im.abs() <= real_tol).map(|c| c.root).collect();
        let upper: Vec<RootCluster> = clusters.iter().copied().filter(|c| c.root.im > real_tol).collect();
        let upper_count = upper.iter().map(|c| c.multiplicity).sum();
        let k1 = upper.iter().map(|c| c.multiplicity).max().unwrap_or(0);
        let (verdict, note) = if q0 <= 1e-12 * qscale {
            (Tri::Indeterminate, Some("Q(0) vanishes".to_string()))
        } else if !on_axis.is_empty() {
            let list: Vec<String> = on_axis.iter().map(|z| poly::format_complex(*z)).collect();
            (Tri::Indeterminate, Some(format!("roots near the real axis: {}", list.join(", "))))
        } else if upper_count == expected {
            (Tri::Yes, None)
        } else {
            (Tri::No, None)
        };
        Ok(DegenerationReport { q, roots: clusters, upper, upper_count, expected, verdict, k1, note })
    }

    pub fn remark22_checks(&self, grid: &SphereGrid) -> Result<Remark22Report> {
        let even_order = self.terms.iter().all(|t| t.j % 2 == 0);
        let dirs = directions(self.n, grid);
        let min_re = dirs
            .par_iter()
            .map(|w| {
                let p = self.parts_at(w);
                (0..grid.angular)
                    .map(|k| {
                        let th = FRAC_PI_2 * k as f64 / grid.angular as f64;
                        let (rho, lam) = (th.cos(), th.sin());
                        let den = rho.powi(2 * self.mu as i32)
                            * (rho + lam).powi(2 * (self.m - self.mu) as i32);
                        self.eval_radial(&p, rho, lam).re / den
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        let strongly_elliptic = min_re > grid.tol * self.coefficient_scale();
        let regular = self.check_regular_degeneration()?.verdict;
        let consistent = !(even_order || strongly_elliptic) || regular == Tri::Yes;
        Ok(Remark22Report { even_order, strongly_elliptic, min_re_ratio: min_re, regular, consistent })
    }

    /// All `2m` roots of `A(ξ', ·, λ)`, requiring `m` of them above the real axis.
    pub fn tau_roots(&self, xi_prime: &[f64], lambda: f64) -> Result<RootSet> {
        if xi_prime.iter().all(|&x| x == 0.0) && lambda <= 0.0 {
            return Err(Error::InvalidInput("need xi' != 0 or lambda > 0".into()));
        }
        let c = self.tau_polynomial(xi_prime, lambda)?;
        let clusters = poly::roots_clustered(&c)?;
        let scale = clusters.iter().map(|c| c.root.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let tol = 1e-6 * scale;
        if let Some(bad) = clusters.iter().find(|c| c.root.im.abs() <= tol) {
            return Err(Error::RealAxisRoot { root: poly::format_complex(bad.root), tol });
        }
        let upper_clusters: Vec<RootCluster> = clusters.iter().copied().filter(|c| c.root.im > 0.0).collect();
        let upper = poly::expand(&upper_clusters);
        if upper.len() != self.m as usize {
            return Err(Error::UpperRootCount { expected: self.m as usize, found: upper.len() });
        }
        Ok(RootSet { all: poly::expand(&clusters), clusters, upper, upper_clusters })
    }

    pub fn group_roots(&self, xi_prime: &[f64], lambda: f64) -> Result<RootGrouping> {
        let set = self.tau_roots(xi_prime, lambda)?;
        let mu = self.mu as usize;
        let bounded_targets = if mu == 0 {
            Vec::new()
        } else {
            let low = self.low_part_tau_polynomial(xi_prime)?;
            let up: Vec<C64> = poly::roots(&low)?.into_iter().filter(|z| z.im > 0.0).collect();
            if up.len() != mu {
                return Err(Error::GroupingMismatch(format!(
                    "A_2mu(xi', tau) has {} upper roots, expected {mu}",
                    up.len()
                )));
            }
            up
        };
        let deg = self.check_regular_degeneration()?;
        let q_upper = poly::expand(&deg.upper);
        if q_upper.len() != self.m as usize - mu {
            return Err(Error::GroupingMismatch(format!(
                "Q has {} upper roots, expected {}",
                q_upper.len(),
                self.m as usize - mu
            )));
        }
        let large_targets: Vec<C64> = q_upper.iter().map(|&t| t * lambda).collect();
        let targets: Vec<C64> = bounded_targets.iter().chain(&large_targets).copied().collect();
        let assign = min_cost_assignment(&set.upper, &targets);
        let mut residuals = vec![0.0; set.upper.len()];
        let mut group_bounded = Vec::with_capacity(mu);
        let mut group_large = Vec::with_capacity(targets.len() - mu);
        let mut target_of = vec![0usize; set.upper.len()];
        for (t, &r) in assign.iter().enumerate() {
            residuals[r] = (set.upper[r] - targets[t]).norm();
            target_of[r] = t;
            if t < mu {
                group_bounded.push(r);
            } else {
                group_large.push(r);
            }
        }
        let ambiguous = (0..set.upper.len())
            .filter(|&r| {
                let own_bounded = target_of[r] < mu;
                targets.iter().enumerate().any(|(t, &z)| {
                    (t < mu) != own_bounded && (set.upper[r] - z).norm() < residuals[r]
                })
            })
            .collect();
        Ok(RootGrouping {
            upper_roots: set.upper,
            bounded_targets,
            large_targets,
            group_bounded,
            group_large,
            residuals,
            ambiguous,
            k1: deg.k1,
        })
    }
}

fn monomial(alpha: &[u32], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product()
}

/// For target `t`, the index of the root assigned to it (exact minimum total
/// distance, bitmask dynamic programming).
fn min_cost_assignment(roots: &[C64], targets: &[C64]) -> Vec<usize> {
    let n = targets.len();
    debug_assert_eq!(roots.len(), n);
    let full = 1usize << n;
    let mut dp = vec![f64::INFINITY; full];
    let mut choice = vec![usize::MAX; full];
    dp[0] = 0.0;
    for mask in 0..full {
        if !dp[mask].is_finite() {
            continue;
        }
        let t = mask.count_ones() as usize;
        if t == n {
            continue;
        }
        for r in 0..n {
            if mask & (1 << r) != 0 {
                continue;
            }
            let next = mask | (1 << r);
            let cost = dp[mask] + (roots[r] - targets[t]).norm();
            if cost < dp[next] {
                dp[next] = cost;
                choice[next] = r;
            }
        }
    }
    let mut out = vec![0usize; n];
    let mut mask = full - 1;
    for t in (0..n).rev() {
        let r = choice[mask];
        out[t] = r;
        mask &= !(1 << r);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    /// θ-samples on the quarter circle, and directions on the circle for n = 2.
    pub angular: usize,
    /// Directions on the sphere for n ≥ 3.
    pub nodes: usize,
    pub seed: u64,
    /// Relative threshold below which a sampled value counts as zero.
    pub tol: f64,
}

impl Default for SphereGrid {
    fn default() -> Self {
        SphereGrid { angular: 720, nodes: 2000, seed: 0, tol: 1e-8 }
    }
}

/// Unit directions in `ℝ^n`: `±1` for n = 1, a uniform angular grid for
/// n = 2, spherical Fibonacci nodes for n = 3, seeded random points beyond.
pub fn directions(n: usize, grid: &SphereGrid) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..grid.angular)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / grid.angular as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let nn = grid.nodes;
            (0..nn)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / nn as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
            (0..grid.nodes).map(|_| random_direction(n, &mut rng)).collect()
        }
    }
}

pub fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        // Box–Muller pairs
        let mut v: Vec<f64> = Vec::with_capacity(n + 1);
        while v.len() < n {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * (2.0 * PI * u2).cos());
            v.push(r * (2.0 * PI * u2).sin());
        }
        v.truncate(n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn sphere_condition(dirs: &[Vec<f64>], parts: &[Vec<C64>], idx: usize, tol: f64) -> ConditionCheck {
    let mut best = (f64::INFINITY, 0usize);
    let mut first_bad = None;
    for (d, p) in parts.iter().enumerate() {
        let v = p[idx].norm();
        if v < best.0 {
            best = (v, d);
        }
        if v <= tol && first_bad.is_none() {
            first_bad = Some(d);
        }
    }
    let w = first_bad.unwrap_or(best.1);
    ConditionCheck { holds: best.0 > tol, min_value: best.0, witness: dirs[w].clone(), witness_lambda: None }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub min_value: f64,
    /// First sampled point at or below tolerance, else the minimizer.
    pub witness: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub cond_i: ConditionCheck,
    pub cond_ii: ConditionCheck,
    pub cond_iii: ConditionCheck,
    /// Sampled minimum of `|A|/(|ξ|^{2μ}(λ+|ξ|)^{2m−2μ})`; zero when a
    /// condition fails.
    pub c_est: f64,
    pub c_witness: Vec<f64>,
    pub c_witness_lambda: f64,
    pub directions: usize,
    pub angular: usize,
    pub tol: f64,
}

impl EllipticityReport {
    pub fn all_hold(&self) -> bool {
        self.cond_i.holds && self.cond_ii.holds && self.cond_iii.holds
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Indeterminate,
}

impl std::fmt::Display for Tri {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tri::Yes => "YES",
            Tri::No => "NO",
            Tri::Indeterminate => "INDETERMINATE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub q: Vec<C64>,
    pub roots: Vec<RootCluster>,
    pub upper: Vec<RootCluster>,
    pub upper_count: usize,
    pub expected: usize,
    pub verdict: Tri,
    pub k1: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DegenerationReport {
    pub fn summary(&self) -> String {
        let upper: Vec<String> = self
            .upper
            .iter()
            .map(|c| {
                let z = poly::format_complex(c.root);
                if c.multiplicity > 1 {
                    format!("{z} (x{})", c.multiplicity)
                } else {
                    z
                }
            })
            .collect();
        let mut s = format!(
            "Q(τ)={}; upper roots: {}; regular degeneration: {}; k1={}",
            poly::format_poly(&self.q, "τ"),
            if upper.is_empty() { "none".to_string() } else { upper.join(", ") },
            self.verdict,
            self.k1
        );
        if let Some(note) = &self.note {
            s.push_str(&format!(" ({note})"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark22Report {
    pub even_order: bool,
    pub strongly_elliptic: bool,
    pub min_re_ratio: f64,
    pub regular: Tri,
    /// Either sufficient condition, when present, agrees with the direct count.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub all: Vec<C64>,
    pub clusters: Vec<RootCluster>,
    pub upper: Vec<C64>,
    pub upper_clusters: Vec<RootCluster>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootGrouping {
    pub upper_roots: Vec<C64>,
    /// Upper zeros of `A_{2μ}(ξ', ·)`.
    pub bounded_targets: Vec<C64>,
    /// `λ·τ¹` for the upper zeros `τ¹` of `Q`.
    pub large_targets: Vec<C64>,
    /// Root indices matched to `bounded_targets`, in target order.
    pub group_bounded: Vec<usize>,
    pub group_large: Vec<usize>,
    /// Distance of each upper root to its matched target.
    pub residuals: Vec<f64>,
    /// Roots closer to a target of the other group than to their own.
    pub ambiguous: Vec<usize>,
    pub k1: usize,
}

/// Pencils used throughout the tests and examples.
pub mod examples {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// `|ξ|²(|ξ|² + λ²)`: `m = 2`, `μ = 1`.
    pub fn e1(n: usize) -> Pencil {
        Pencil::from_radial(n, 2, 1, &[(4, c(1.0)), (2, c(1.0))]).expect("valid pencil")
    }

    /// `λ² + |ξ|²`: `m = 1`, `μ = 0`.
    pub fn agmon(n: usize) -> Pencil {
        Pencil::from_radial(n, 1, 0, &[(2, c(1.0)), (0, c(1.0))]).expect("valid pencil")
    }

    /// `|ξ|⁴ + λ² ξ₁²` in two variables; `A_2` is not elliptic.
    pub fn broken() -> Pencil {
        let mut terms: Vec<Term> = radial_monomials(2, 2, 0, c(1.0))
            .into_iter()
            .map(|t| Term { alpha: t.alpha, j: 4, coeff: t.coeff })
            .collect();
        terms.push(Term { alpha: vec![2, 0], j: 2, coeff: c(1.0) });
        Pencil::new(2, 2, 1, terms).expect("valid pencil")
    }

    /// `|ξ|^{2m} + λ^{2m−2μ}|ξ|^{2μ}`.
    pub fn even(n: usize, m: u32, mu: u32) -> Pencil {
        Pencil::from_radial(n, m, mu, &[(2 * m, c(1.0)), (2 * mu, c(1.0))]).expect("valid pencil")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn eval_examples() {
        let e = e1(2);
        assert!(close(e.eval(&[1.0, 0.0], 2.0).unwrap(), c(5.0, 0.0), 1e-14));
        assert_eq!(e.eval(&[0.0, 0.0], 0.0).unwrap(), c(0.0, 0.0));
        assert!(close(agmon(2).eval(&[3.0, 4.0], 0.0).unwrap(), c(25.0, 0.0), 1e-14));
        assert!(matches!(e.eval(&[1.0], 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let e = e1(2);
        let back = Pencil::from_json_str(&e.to_json().unwrap()).unwrap();
        assert_eq!(back, e);
        let bad = r#"{"n":2,"m":2,"mu":1,"terms":[{"alpha":[1,2],"j":2,"re":1.0,"im":0.0}]}"#;
        assert!(matches!(Pencil::from_json_str(bad), Err(Error::MalformedPencil(_))));
        let low = r#"{"n":1,"m":2,"mu":1,"terms":[{"alpha":[1],"j":1,"re":1.0,"im":0.0}]}"#;
        assert!(Pencil::from_json_str(low).is_err());
        let missing = Pencil::from_radial(2, 2, 1, &[(4, c(1.0, 0.0))]).unwrap();
        assert_eq!(missing.warnings.len(), 1);
    }

    #[test]
    fn tau_polynomial_examples() {
        let e = e1(2);
        let p = e.tau_polynomial(&[1.0], 10.0).unwrap();
        let want = [101.0, 0.0, 102.0, 0.0, 1.0];
        for (x, w) in p.iter().zip(want) {
            assert!(close(*x, c(w, 0.0), 1e-14));
        }
        let p = e.tau_polynomial(&[0.0], 1.0).unwrap();
        assert_eq!(p, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(agmon(2).tau_polynomial(&[0.0], 1.0).unwrap(), vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        // ξ₂ never appears with full degree: leading coefficient vanishes
        let flat = Pencil::new(2, 1, 0, vec![
            Term { alpha: vec![2, 0], j: 2, coeff: c(1.0, 0.0) },
            Term { alpha: vec![0, 0], j: 0, coeff: c(1.0, 0.0) },
        ])
        .unwrap();
        assert!(matches!(flat.tau_polynomial(&[1.0], 1.0), Err(Error::NotEllipticInXiN(_))));
    }

    #[test]
    fn lemma21_examples() {
        let g = SphereGrid::default();
        let r = e1(2).check_lemma21(&g);
        assert!(r.all_hold());
        assert!(r.c_est >= 0.5 - 1e-12, "{}", r.c_est);
        let r = agmon(2).check_lemma21(&g);
        assert!(r.all_hold() && r.c_est >= 0.5 - 1e-12);
        let r = broken().check_lemma21(&g);
        assert!(r.cond_i.holds && !r.cond_ii.holds);
        assert!((r.cond_ii.witness[0]).abs() < 1e-6 && (r.cond_ii.witness[1] - 1.0).abs() < 1e-6);
        assert_eq!(r.c_est, 0.0);
    }

    #[test]
    fn lemma21_three_dimensions() {
        let g = SphereGrid { angular: 90, nodes: 500, ..SphereGrid::default() };
        let r = e1(3).check_lemma21(&g);
        assert!(r.all_hold() && r.c_est >= 0.5 - 1e-12);
    }

    #[test]
    fn lower_bound_survives_fresh_samples() {
        let e = e1(2);
        let r = e.check_lemma21(&SphereGrid::default());
        let fresh = e.sampled_lower_ratio(5000, 7);
        assert!(fresh >= r.c_est * (1.0 - 1e-3));
    }

    #[test]
    fn q_polynomial_examples() {
        let q = e1(2).q_polynomial().unwrap();
        assert_eq!(q, vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(agmon(2).q_polynomial().unwrap(), vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let q = even(2, 3, 1).q_polynomial().unwrap();
        assert_eq!(q.len(), 5);
        assert!(q.iter().skip(1).step_by(2).all(|x| x.is_zero()));
    }

    #[test]
    fn degeneration_examples() {
        let r = e1(2).check_regular_degeneration().unwrap();
        assert_eq!(r.verdict, Tri::Yes);
        assert_eq!(r.k1, 1);
        assert!(close(r.upper[0].root, c(0.0, 1.0), 1e-14));
        assert_eq!(r.summary(), "Q(τ)=τ²+1; upper roots: i; regular degeneration: YES; k1=1");

        // Q = (τ−i)(τ−2i)(τ+3i)(τ+4i)... built as m−μ = 1 with two upper roots is
        // impossible by degree, so use m−μ = 2 with three upper roots instead.
        let q = poly::from_roots(&[c(0.0, 1.0), c(0.0, 2.0), c(0.0, 3.0), c(0.0, -1.0)]);
        let terms: Vec<Term> = q
            .iter()
            .enumerate()
            .map(|(k, &a)| Term { alpha: vec![k as u32], j: k as u32, coeff: a })
            .collect();
        let p = Pencil::new(1, 2, 0, terms).unwrap();
        let r = p.check_regular_degeneration().unwrap();
        assert_eq!(r.verdict, Tri::No);
        assert_eq!(r.upper_count, 3);

        for (m, mu) in [(2, 1), (3, 1), (4, 2), (3, 0)] {
            assert_eq!(even(2, m, mu).check_regular_degeneration().unwrap().verdict, Tri::Yes);
        }
        assert_eq!(broken().check_regular_degeneration().unwrap().verdict, Tri::Indeterminate);
    }

    #[test]
    fn double_upper_root_of_q() {
        // Q(τ) = (τ² + 1)², m − μ = 2, k1 = 2
        let p = Pencil::from_radial(2, 3, 1, &[(6, c(1.0, 0.0)), (4, c(2.0, 0.0)), (2, c(1.0, 0.0))]).unwrap();
        let r = p.check_regular_degeneration().unwrap();
        assert_eq!(r.verdict, Tri::Yes);
        assert_eq!(r.k1, 2);
    }

    #[test]
    fn remark22_examples() {
        let g = SphereGrid { angular: 180, ..SphereGrid::default() };
        let r = e1(2).remark22_checks(&g).unwrap();
        assert!(r.even_order && r.strongly_elliptic && r.consistent);
        let mut terms = e1(2).terms.clone();
        terms.push(Term { alpha: vec![3, 0], j: 3, coeff: c(0.0, 1.0) });
        let odd = Pencil::new(2, 2, 1, terms).unwrap();
        assert!(!odd.remark22_checks(&g).unwrap().even_order);
    }

    #[test]
    fn tau_roots_examples() {
        let e = e1(2);
        let r = e.tau_roots(&[1.0], 10.0).unwrap();
        assert!(close(r.upper[0], c(0.0, 1.0), 1e-13));
        assert!(close(r.upper[1], c(0.0, 101f64.sqrt()), 1e-13));
        let r = e.tau_roots(&[1.0], 0.0).unwrap();
        assert_eq!(r.upper_clusters.len(), 1);
        assert_eq!(r.upper_clusters[0].multiplicity, 2);
        assert!(close(r.upper[0], c(0.0, 1.0), 1e-12));
        let r = agmon(2).tau_roots(&[0.0], 1.0).unwrap();
        assert_eq!(r.upper.len(), 1);
        assert!(close(r.upper[0], c(0.0, 1.0), 1e-14));
        assert!(matches!(e.tau_roots(&[0.0], 1.0), Err(Error::RealAxisRoot { .. })));
        assert!(e.tau_roots(&[0.0], 0.0).is_err());
    }

    #[test]
    fn grouping_examples() {
        let e = e1(2);
        let g = e.group_roots(&[1.0], 10.0).unwrap();
        assert_eq!(g.group_bounded.len(), 1);
        assert!(close(g.upper_roots[g.group_bounded[0]], c(0.0, 1.0), 1e-12));
        let big = g.group_large[0];
        assert!((g.residuals[big] - (101f64.sqrt() - 10.0)).abs() < 1e-12);
        assert!(g.ambiguous.is_empty());

        let g = e.group_roots(&[1.0], 1000.0).unwrap();
        let res = g.residuals[g.group_large[0]];
        assert!((res / 0.0005 - 1.0).abs() < 1e-3, "{res}");

        let g = agmon(2).group_roots(&[1.0], 5.0).unwrap();
        assert!(g.group_bounded.is_empty() && g.group_large.len() == 1);
    }

    #[test]
    fn assignment_is_optimal() {
        let roots = [c(0.0, 1.0), c(0.0, 3.0), c(0.0, 2.0)];
        let targets = [c(0.0, 2.1), c(0.0, 0.9), c(0.0, 3.2)];
        assert_eq!(min_cost_assignment(&roots, &targets), vec![2, 0, 1]);
    }

    proptest! {
        #[test]
        fn homogeneity(t in 0.1f64..10.0, x in -2.0f64..2.0, y in -2.0f64..2.0, l in 0.0f64..3.0) {
            for p in [e1(2), agmon(2), broken()] {
                let a = p.eval(&[t * x, t * y], t * l).unwrap();
                let b = p.eval(&[x, y], l).unwrap() * t.powi(2 * p.m as i32);
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
        }

        #[test]
        fn real_pencils_have_conjugate_roots(x in 0.1f64..5.0, l in 0.0f64..50.0) {
            let r = e1(2).tau_roots(&[x], l).unwrap();
            let upper = r.all.iter().filter(|z| z.im > 0.0).count();
            prop_assert_eq!(upper, 2);
            prop_assert_eq!(r.all.len() - upper, 2);
        }

        #[test]
        fn strong_ellipticity_implies_regular_degeneration(
            a in 0.1f64..3.0, b in 0.1f64..3.0, m in 2u32..4
        ) {
            // |ξ|^{2m} + a λ² |ξ|^{2m−2} + b λ^{2m−2}|ξ|² with μ = 1
            let p = Pencil::from_radial(2, m, 1, &[
                (2 * m, C64::new(1.0, 0.0)),
                (2 * m - 2, C64::new(a, 0.0)),
                (2, C64::new(b, 0.0)),
            ]).unwrap();
            let g = SphereGrid { angular: 24, ..SphereGrid::default() };
            let r = p.remark22_checks(&g).unwrap();
            prop_assert!(r.strongly_elliptic && r.even_order);
            prop_assert_eq!(r.regular, Tri::Yes);
        }
    }
}
