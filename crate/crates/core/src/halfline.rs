//! Half-line Dirichlet problem `A(ξ', D_t, λ) w_j = 0`, `D_t^{k−1} w_j(0) = δ_{jk}`,
//! `w_j → 0`, with `D_t = −i d/dt`.
//!
//! Solutions are exponential polynomials `Σ P_k(t) e^{iτ_k t}` built from
//! residues of `M_j(τ) e^{itτ} / A_+(τ)` at the upper roots `τ_k`.

use std::f64::consts::PI;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pencil::{Pencil, RootGrouping};
use crate::poly::{self, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Contour nodes for the fallback and for the quadrature oracles.
pub const CONTOUR_NODES: usize = 256;

/// Largest cluster handled by the series residue formula.
pub const MAX_SERIES_CLUSTER: usize = 4;

/// `A_+(τ) = Π(τ − τ_k) = Σ_k a_k τ^{m−k}`, `a_0 = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vieta {
    pub a: Vec<C64>,
}

impl Vieta {
    pub fn m(&self) -> usize {
        self.a.len() - 1
    }

    /// `A_+` with ascending coefficients.
    pub fn a_plus(&self) -> Vec<C64> {
        self.a.iter().rev().copied().collect()
    }
}

/// `a_k = (−1)^k e_k(τ_1, …, τ_m)`.
pub fn vieta(roots: &[C64]) -> Vieta {
    let mut e = vec![C64::zero(); roots.len() + 1];
    e[0] = C64::new(1.0, 0.0);
    for (idx, &r) in roots.iter().enumerate() {
        for k in (1..=idx + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * r;
        }
    }
    let a = e
        .into_iter()
        .enumerate()
        .map(|(k, x)| if k % 2 == 1 { -x } else { x })
        .collect();
    Vieta { a }
}

/// `M_j(τ) = Σ_{k=0}^{m−j} a_k τ^{m−j−k}`, ascending coefficients.
pub fn mj(v: &Vieta, j: usize) -> Result<Vec<C64>> {
    let m = v.m();
    if j == 0 || j > m {
        return Err(Error::OutOfRange(format!("boundary index j = {j} not in 1..={m}")));
    }
    Ok((0..=m - j).map(|p| v.a[m - j - p]).collect())
}

/// First `n` Taylor coefficients of `M_j` at `c`.
///
/// Near large roots the expanded form cancels heavily, so `M_j` is also
/// available as `(A_+(τ) − R_j(τ))/τ^j` with `A_+` in product form and
/// `R_j = Σ_{k>m−j} a_k τ^{m−k}`; the form with the smaller term sum is used.
fn mj_taylor(roots: &[C64], v: &Vieta, j: usize, c: C64, n: usize) -> Vec<C64> {
    let m = v.m();
    let cn = c.norm();
    let direct_size: f64 = (0..=m - j).map(|k| v.a[k].norm() * cn.powi((m - j - k) as i32)).sum();
    let low_size: f64 =
        (m - j + 1..=m).map(|k| v.a[k].norm() * cn.powi((m - k) as i32)).sum::<f64>() / cn.powi(j as i32);
    if direct_size <= low_size || cn == 0.0 {
        let direct: Vec<C64> = (0..=m - j).map(|p| v.a[m - j - p]).collect();
        let mut h = poly::taylor_shift(&direct, c);
        h.resize(n, C64::zero());
        return h;
    }
    let mut num = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        num = poly::mul(&num, &[c - r, C64::new(1.0, 0.0)]);
    }
    let low: Vec<C64> = (0..j).map(|i| v.a[m - i]).collect();
    for (x, y) in num.iter_mut().zip(poly::taylor_shift(&low, c)) {
        *x -= y;
    }
    // (c + z)^{−j} = c^{−j} Σ_q C(−j, q) (z/c)^q
    let mut inv = Vec::with_capacity(n);
    let mut coef = c.powi(-(j as i32));
    for q in 0..n {
        inv.push(coef);
        coef = coef * (-(j as f64 + q as f64) / (q as f64 + 1.0)) / c;
    }
    let mut h = poly::mul(&num, &inv);
    h.resize(n, C64::zero());
    h
}

/// One term `P(t) e^{iτt}`; `roots` lists the upper roots it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub tau: C64,
    /// Ascending coefficients in `t`.
    pub poly: Vec<C64>,
    #[serde(skip)]
    pub roots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpPolySolution {
    pub j: usize,
    pub terms: Vec<ExpTerm>,
    /// Upper roots, with repetition for multiple roots.
    pub roots: Vec<C64>,
    pub vieta: Vec<C64>,
    /// Some cluster was handled by contour quadrature instead of residues.
    pub fallback: bool,
}

#[derive(Serialize)]
struct DumpTerm {
    tau: [f64; 2],
    poly: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Dump {
    j: usize,
    fallback: bool,
    terms: Vec<DumpTerm>,
}

impl ExpPolySolution {
    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().map(|term| poly::eval(&term.poly, C64::new(t, 0.0)) * (I * term.tau * t).exp()).sum()
    }

    /// `D_t^l` applied termwise: `D_t[e^{iτt}P] = e^{iτt}(τP − iP')`.
    pub fn deriv(&self, l: usize) -> ExpPolySolution {
        let mut out = self.clone();
        for term in out.terms.iter_mut() {
            for _ in 0..l {
                term.poly = d_t(term.tau, &term.poly);
            }
        }
        out
    }

    pub fn eval_deriv(&self, l: usize, t: f64) -> C64 {
        self.deriv(l).eval(t)
    }

    /// Exact `‖w‖_{L²(ℝ₊)}` from `∫₀^∞ t^p e^{−ct} dt = p!/c^{p+1}`.
    pub fn l2_norm(&self) -> f64 {
        let mut acc = C64::zero();
        for a in &self.terms {
            for b in &self.terms {
                let c = -I * (a.tau - b.tau.conj());
                let deg = a.poly.len() + b.poly.len();
                // g[p] = p!/c^{p+1}
                let mut g = Vec::with_capacity(deg);
                let mut cur = C64::new(1.0, 0.0) / c;
                for p in 0..deg {
                    if p > 0 {
                        cur = cur * p as f64 / c;
                    }
                    g.push(cur);
                }
                for (p, &x) in a.poly.iter().enumerate() {
                    for (q, &y) in b.poly.iter().enumerate() {
                        acc += x * y.conj() * g[p + q];
                    }
                }
            }
        }
        acc.re.max(0.0).sqrt()
    }

    pub fn l2_norm_deriv(&self, l: usize) -> f64 {
        self.deriv(l).l2_norm()
    }

    /// Largest coefficient of `A(ξ', D_t, λ)` applied to each term, relative
    /// to the size of the contributions that cancel.
    pub fn ode_residual(&self, tau_poly: &[C64]) -> f64 {
        let mut worst: f64 = 0.0;
        for term in &self.terms {
            let taylor = poly::taylor_shift(tau_poly, term.tau);
            let mut dk = term.poly.clone();
            let mut res = vec![C64::zero(); term.poly.len()];
            let mut scale = 0.0;
            for (k, &tk) in taylor.iter().enumerate() {
                if k > 0 {
                    dk = d_only(&dk);
                }
                if dk.is_empty() {
                    break;
                }
                let size = poly::eval_abs(&poly::nth_derivative(tau_poly, k), term.tau)
                    / (1..=k).map(|x| x as f64).product::<f64>();
                let dmax = dk.iter().map(|x| x.norm()).fold(0.0, f64::max);
                scale += size * dmax;
                for (idx, &x) in dk.iter().enumerate() {
                    res[idx] += tk * x;
                }
            }
            if scale > 0.0 {
                let r = res.iter().map(|x| x.norm()).fold(0.0, f64::max);
                worst = worst.max(r / scale);
            }
        }
        worst
    }

    /// JSON with terms `[{"tau":[re,im],"poly":[[re,im],…]}]`.
    pub fn to_json(&self) -> Result<String> {
        let dump = Dump {
            j: self.j,
            fallback: self.fallback,
            terms: self
                .terms
                .iter()
                .map(|t| DumpTerm {
                    tau: [t.tau.re, t.tau.im],
                    poly: t.poly.iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&dump)?)
    }
}

fn a_plus_at(roots: &[C64], tau: C64) -> C64 {
    roots.iter().map(|&r| tau - r).product()
}

fn d_t(tau: C64, p: &[C64]) -> Vec<C64> {
    let mut out: Vec<C64> = p.iter().map(|&x| x * tau).collect();
    for (k, &x) in p.iter().enumerate().skip(1) {
        out[k - 1] += -I * x * k as f64;
    }
    out
}

// −i d/dt on the polynomial alone
fn d_only(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(k, &x)| -I * x * k as f64).collect()
}

/// `max_{j,k} |D_t^{k−1} w_j(0) − δ_{jk}|`.
pub fn boundary_defect(sols: &[ExpPolySolution]) -> f64 {
    let mut worst: f64 = 0.0;
    for s in sols {
        for k in 1..=sols.len() {
            let want = if k == s.j { 1.0 } else { 0.0 };
            worst = worst.max((s.eval_deriv(k - 1, 0.0) - want).norm());
        }
    }
    worst
}

/// Like [`boundary_defect`], but each entry is measured against
/// `max(δ_{jk}, Σ_terms Σ_b C(k−1,b) b! |p_b| |τ|^{k−1−b})`, the size of what cancels.
pub fn relative_boundary_defect(sols: &[ExpPolySolution]) -> f64 {
    let mut worst: f64 = 0.0;
    for s in sols {
        for k in 1..=sols.len() {
            let n = k - 1;
            let want = if k == s.j { 1.0 } else { 0.0 };
            let size: f64 = s
                .terms
                .iter()
                .map(|t| {
                    let r = t.tau.norm();
                    let mut binom = 1.0;
                    let mut fact = 1.0;
                    let mut acc = 0.0;
                    for (b, p) in t.poly.iter().enumerate().take(n + 1) {
                        if b > 0 {
                            binom *= (n + 1 - b) as f64 / b as f64;
                            fact *= b as f64;
                        }
                        acc += binom * fact * p.norm() * r.powi((n - b) as i32);
                    }
                    acc
                })
                .sum();
            let err = (s.eval_deriv(n, 0.0) - want).norm();
            worst = worst.max(err / size.max(want).max(f64::MIN_POSITIVE));
        }
    }
    worst
}

/// Solves for every `j` at a symbol point.
pub fn solve(p: &Pencil, xi_prime: &[f64], lambda: f64) -> Result<Vec<ExpPolySolution>> {
    let set = p.tau_roots(xi_prime, lambda)?;
    solve_roots(&set.upper)
}

/// Solutions for `A_+ = Π(τ − τ_k)` given directly by its roots.
pub fn solve_roots(roots: &[C64]) -> Result<Vec<ExpPolySolution>> {
    if roots.is_empty() {
        return Err(Error::InvalidInput("no roots".into()));
    }
    if let Some(r) = roots.iter().find(|r| !(r.im > 0.0)) {
        return Err(Error::InvalidInput(format!("root {} is not in the upper half-plane", poly::format_complex(*r))));
    }
    let v = vieta(roots);
    let clusters = root_clusters(roots);
    (1..=roots.len())
        .map(|j| {
            let mut terms = Vec::new();
            let mut fallback = false;
            for cl in &clusters {
                match series_residue(roots, cl, &v, j) {
                    Some(t) => terms.push(t),
                    None => {
                        fallback = true;
                        terms.extend(contour_terms(roots, cl, &v, j)?);
                    }
                }
            }
            Ok(ExpPolySolution { j, terms, roots: roots.to_vec(), vieta: v.a.clone(), fallback })
        })
        .collect()
}

/// Roots closer than `10⁻³·min(Im)` are treated together.
fn root_clusters(roots: &[C64]) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut g = vec![s];
        seen[s] = true;
        let mut idx = 0;
        while idx < g.len() {
            let a = roots[g[idx]];
            for b in 0..n {
                if !seen[b] && (roots[b] - a).norm() <= 1e-3 * a.im.min(roots[b].im) {
                    seen[b] = true;
                    g.push(b);
                }
            }
            idx += 1;
        }
        g.sort_unstable();
        groups.push(g);
    }
    groups
}

/// Sum of residues over a cluster as `e^{itc}·P(t)`, expanding about the
/// centroid `c`. With offsets `u_i` the `t^b` coefficient is
/// `i^b/b!·Σ_a h_a H_{a+b−p+1}(u)` where `h_a` are Taylor coefficients of
/// `M_j / Π_{others}(τ − τ_k)` at `c` and `H_q` are complete homogeneous
/// symmetric polynomials. Returns `None` when the cluster is too large or
/// too wide for the series.
fn series_residue(roots: &[C64], cluster: &[usize], v: &Vieta, j: usize) -> Option<ExpTerm> {
    let p = cluster.len();
    if p > MAX_SERIES_CLUSTER {
        return None;
    }
    let c = cluster.iter().map(|&i| roots[i]).sum::<C64>() / p as f64;
    let u: Vec<C64> = cluster.iter().map(|&i| roots[i] - c).collect();
    let delta = u.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let others: Vec<C64> =
        (0..roots.len()).filter(|i| !cluster.contains(i)).map(|i| roots[i]).collect();
    let reach = others.iter().map(|&o| (o - c).norm()).fold(f64::INFINITY, f64::min);
    if delta > 0.1 * reach || delta > 0.1 * c.im {
        return None;
    }
    let extra = if delta == 0.0 { 0 } else { 40 };
    let n_h = p + extra;
    let n_b = p + extra;

    // h: Taylor coefficients of g(c+z)
    let mut h = mj_taylor(roots, v, j, c, n_h);
    for &o in &others {
        let d = c - o;
        let inv: Vec<C64> = (0..n_h)
            .map(|a| {
                let s = if a % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(s, 0.0) / d.powu(a as u32 + 1)
            })
            .collect();
        let mut prod = poly::mul(&h, &inv);
        prod.truncate(n_h);
        h = prod;
    }
    // H_q(u)
    let n_q = n_h + n_b;
    let mut hq = vec![C64::zero(); n_q];
    hq[0] = C64::new(1.0, 0.0);
    for &x in &u {
        for q in 1..n_q {
            let prev = hq[q - 1];
            hq[q] += x * prev;
        }
    }
    let mut coeffs = Vec::with_capacity(n_b);
    let mut ib_over_fact = C64::new(1.0, 0.0);
    for b in 0..n_b {
        if b > 0 {
            ib_over_fact = ib_over_fact * I / b as f64;
        }
        let mut s = C64::zero();
        for (a, &ha) in h.iter().enumerate() {
            let q = a as i64 + b as i64 - p as i64 + 1;
            if q >= 0 && (q as usize) < n_q {
                s += ha * hq[q as usize];
            }
        }
        coeffs.push(ib_over_fact * s);
    }
    // Drop trailing coefficients that are negligible against e^{−Im c·t}.
    let gamma = c.im;
    let weight = |b: usize, x: C64| {
        x.norm() * (1..=b).map(|k| k as f64 / gamma).product::<f64>()
    };
    let top = coeffs.iter().enumerate().map(|(b, &x)| weight(b, x)).fold(0.0, f64::max);
    while coeffs.len() > 1 {
        let b = coeffs.len() - 1;
        if weight(b, coeffs[b]) <= 1e-18 * top {
            coeffs.pop();
        } else {
            break;
        }
    }
    Some(ExpTerm { tau: c, poly: coeffs, roots: cluster.to_vec() })
}

/// Trapezoid rule on a circle around the cluster, kept as exponential terms
/// at the nodes.
fn contour_terms(roots: &[C64], cluster: &[usize], v: &Vieta, j: usize) -> Result<Vec<ExpTerm>> {
    let p = cluster.len();
    let c = cluster.iter().map(|&i| roots[i]).sum::<C64>() / p as f64;
    let delta = cluster.iter().map(|&i| (roots[i] - c).norm()).fold(0.0, f64::max);
    let reach = (0..roots.len())
        .filter(|i| !cluster.contains(i))
        .map(|i| (roots[i] - c).norm())
        .fold(f64::INFINITY, f64::min)
        .min(c.im);
    if delta >= 0.9 * reach {
        return Err(Error::Quadrature("root cluster too wide for a separating circle".into()));
    }
    let rho = 0.5 * (delta + reach);
    Ok((0..CONTOUR_NODES)
        .map(|q| {
            let e = C64::from_polar(1.0, 2.0 * PI * q as f64 / CONTOUR_NODES as f64);
            let tau = c + e * rho;
            let w = e * rho * mj_taylor(roots, v, j, tau, 1)[0] / a_plus_at(roots, tau) / CONTOUR_NODES as f64;
            ExpTerm { tau, poly: vec![w], roots: cluster.to_vec() }
        })
        .collect())
}

/// `w_j(t)` by trapezoid quadrature of the contour integral on one small
/// circle per distinct root; independent of the residue construction.
pub fn contour_eval(roots: &[C64], j: usize, t: f64) -> Result<C64> {
    let v = vieta(roots);
    let m_j = mj(&v, j)?;
    let mut distinct: Vec<C64> = Vec::new();
    for &r in roots {
        if !distinct.iter().any(|&d| d == r) {
            distinct.push(r);
        }
    }
    let mut total = C64::zero();
    for (idx, &c) in distinct.iter().enumerate() {
        let sep = distinct
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != idx)
            .map(|(_, &o)| (o - c).norm())
            .fold(f64::INFINITY, f64::min);
        let rho = 0.5 * sep.min(c.im);
        let mut s = C64::zero();
        for q in 0..CONTOUR_NODES {
            let e = C64::from_polar(1.0, 2.0 * PI * q as f64 / CONTOUR_NODES as f64);
            let tau = c + e * rho;
            s += e * rho * poly::eval(&m_j, tau) / a_plus_at(roots, tau) * (I * tau * t).exp();
        }
        total += s / CONTOUR_NODES as f64;
    }
    Ok(total)
}

/// `max_{j,k} |(1/2πi)∮ τ^{k−1} M_j/A_+ dτ − δ_{jk}|` on the circle of
/// radius `1.5·max|τ_k|` about the origin.
pub fn biorthogonality_defect(roots: &[C64]) -> Result<f64> {
    let v = vieta(roots);
    let m = roots.len();
    let radius = 1.5 * roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 1..=m {
        let m_j = mj(&v, j)?;
        for k in 1..=m {
            let mut s = C64::zero();
            for q in 0..CONTOUR_NODES {
                let e = C64::from_polar(1.0, 2.0 * PI * q as f64 / CONTOUR_NODES as f64);
                let tau = e * radius;
                s += e * radius * tau.powu(k as u32 - 1) * poly::eval(&m_j, tau) / a_plus_at(roots, tau);
            }
            s /= CONTOUR_NODES as f64;
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((s - want).norm());
        }
    }
    Ok(worst)
}

/// Residue subtotals over the bounded group and the large group.
pub fn split_by_group(
    sol: &ExpPolySolution,
    grouping: &RootGrouping,
) -> Result<(ExpPolySolution, ExpPolySolution)> {
    if grouping.upper_roots.len() != sol.roots.len()
        || grouping
            .upper_roots
            .iter()
            .zip(&sol.roots)
            .any(|(a, b)| (a - b).norm() > 1e-12 * (1.0 + b.norm()))
    {
        return Err(Error::GroupingMismatch("roots differ from the solution's roots".into()));
    }
    let mut first = ExpPolySolution { terms: Vec::new(), ..sol.clone() };
    let mut second = ExpPolySolution { terms: Vec::new(), ..sol.clone() };
    for term in &sol.terms {
        let bounded = term.roots.iter().all(|r| grouping.group_bounded.contains(r));
        let large = term.roots.iter().all(|r| grouping.group_large.contains(r));
        match (bounded, large) {
            (true, false) => first.terms.push(term.clone()),
            (false, true) => second.terms.push(term.clone()),
            _ => {
                return Err(Error::GroupingMismatch(format!(
                    "term at τ = {} mixes both groups",
                    poly::format_complex(term.tau)
                )))
            }
        }
    }
    Ok((first, second))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityCheck {
    pub norm: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

/// Compares `‖D_t^l w_j(ξ', ·, λ)‖` with `r^{1/2−j+l}·‖D_t^l w_j(ξ'/r, ·, λ/r)‖`.
pub fn homogeneity_check(
    p: &Pencil,
    xi_prime: &[f64],
    lambda: f64,
    r: f64,
    j: usize,
    l: usize,
) -> Result<HomogeneityCheck> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {r}")));
    }
    let norm = solve(p, xi_prime, lambda)?
        .get(j - 1)
        .ok_or_else(|| Error::OutOfRange(format!("j = {j}")))?
        .l2_norm_deriv(l);
    let scaled: Vec<f64> = xi_prime.iter().map(|x| x / r).collect();
    let inner = solve(p, &scaled, lambda / r)?[j - 1].l2_norm_deriv(l);
    let predicted = r.powf(0.5 - j as f64 + l as f64) * inner;
    Ok(HomogeneityCheck { norm, predicted, rel_err: (norm - predicted).abs() / norm.abs().max(f64::MIN_POSITIVE) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::examples::{agmon, e1};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn e1_point() -> (f64, f64) {
        (1.0, 101f64.sqrt())
    }

    #[test]
    fn vieta_examples() {
        assert_eq!(vieta(&[c(0.0, 1.0), c(0.0, 10.0)]).a, vec![c(1.0, 0.0), c(0.0, -11.0), c(-10.0, 0.0)]);
        assert_eq!(vieta(&[c(0.0, 1.0)]).a, vec![c(1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(vieta(&[c(0.0, 1.0), c(0.0, 1.0)]).a, vec![c(1.0, 0.0), c(0.0, -2.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn mj_examples() {
        let v = vieta(&[c(0.0, 1.0), c(0.0, 10.0)]);
        assert_eq!(mj(&v, 2).unwrap(), vec![c(1.0, 0.0)]);
        assert_eq!(mj(&v, 1).unwrap(), vec![c(0.0, -11.0), c(1.0, 0.0)]);
        assert!(mj(&v, 3).is_err());
        assert!(mj(&v, 0).is_err());
    }

    #[test]
    fn e1_closed_forms() {
        let (a, b) = e1_point();
        let sols = solve(&e1(2), &[1.0], 10.0).unwrap();
        for &t in &[0.0, 0.1, 0.5, 2.0] {
            let w1 = (b * (-a * t).exp() - a * (-b * t).exp()) / (b - a);
            let w2 = I * ((-a * t).exp() - (-b * t).exp()) / (b - a);
            assert!((sols[0].eval(t) - w1).norm() < 1e-13);
            assert!((sols[1].eval(t) - w2).norm() < 1e-13);
        }
        assert!((sols[0].eval_deriv(0, 0.0) - 1.0).norm() < 1e-14);
        assert!((sols[1].eval_deriv(1, 0.0) - 1.0).norm() < 1e-14);
        assert!(sols[0].eval_deriv(1, 0.0).norm() < 1e-14);
    }

    #[test]
    fn e1_gram_norms() {
        let (a, b) = e1_point();
        let sols = solve(&e1(2), &[1.0], 10.0).unwrap();
        let oracle = ((0.5 / a - 2.0 / (a + b) + 0.5 / b) / ((b - a) * (b - a))).sqrt();
        assert!((sols[1].l2_norm() / oracle - 1.0).abs() < 1e-12);
        assert!((sols[1].l2_norm() - 0.0671).abs() < 5e-5);
        // D²w₂ = i(−a² e^{−at} + b² e^{−bt})/(b−a)·(−1)
        let d2 = ((a.powi(4) / (2.0 * a) - 2.0 * a * a * b * b / (a + b) + b.powi(4) / (2.0 * b))
            / ((b - a) * (b - a)))
            .sqrt();
        assert!((sols[1].l2_norm_deriv(2) / d2 - 1.0).abs() < 1e-12);
        assert!((d2 - 2.445).abs() < 1e-3);
    }

    #[test]
    fn single_root() {
        let lam = 7.0;
        let sols = solve_roots(&[c(0.0, lam)]).unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0].eval(0.3) - (-lam * 0.3f64).exp()).norm() < 1e-15);
        assert!((sols[0].l2_norm() - 1.0 / (2.0 * lam).sqrt()).abs() < 1e-15);
        let ag = solve(&agmon(2), &[0.0], 1.0).unwrap();
        assert!((ag[0].eval(1.0) - (-1f64).exp()).norm() < 1e-14);
    }

    #[test]
    fn confluent_roots() {
        let sols = solve(&e1(2), &[1.0], 0.0).unwrap();
        assert!(!sols[0].fallback);
        assert_eq!(sols[0].terms.len(), 1);
        assert_eq!(sols[0].terms[0].poly.len(), 2);
        for &t in &[0.0, 0.5, 3.0] {
            assert!((sols[0].eval(t) - (1.0 + t) * (-t).exp()).norm() < 1e-12);
        }
        assert!(boundary_defect(&sols) < 1e-12);
    }

    #[test]
    fn nearly_confluent_roots_agree_with_quadrature() {
        let roots = [c(0.3, 1.0), c(0.3 + 2e-4, 1.0 + 1e-4), c(-1.0, 2.5)];
        let sols = solve_roots(&roots).unwrap();
        assert_eq!(sols[0].terms.len(), 2);
        assert!(boundary_defect(&sols) < 1e-10);
        for s in &sols {
            for &t in &[0.0, 0.5, 2.0] {
                let want = contour_eval(&roots, s.j, t).unwrap();
                assert!((s.eval(t) - want).norm() < 1e-9 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn large_cluster_falls_back_to_contour() {
        let roots: Vec<C64> = (0..5).map(|k| c(1e-5 * k as f64, 1.0)).chain([c(2.0, 3.0)]).collect();
        let sols = solve_roots(&roots).unwrap();
        assert!(sols.iter().all(|s| s.fallback));
        assert!(boundary_defect(&sols) < 1e-8);
    }

    #[test]
    fn biorthogonality_holds() {
        let roots = [c(0.2, 1.0), c(-1.0, 3.0), c(0.0, 10.0)];
        assert!(biorthogonality_defect(&roots).unwrap() < 1e-12);
    }

    #[test]
    fn ode_residual_is_small() {
        let p = e1(2);
        let tau = p.tau_polynomial(&[1.0], 10.0).unwrap();
        for s in solve(&p, &[1.0], 10.0).unwrap() {
            assert!(s.ode_residual(&tau) < 1e-13);
        }
        let tau = p.tau_polynomial(&[1.0], 0.0).unwrap();
        for s in solve(&p, &[1.0], 0.0).unwrap() {
            assert!(s.ode_residual(&tau) < 1e-13);
        }
    }

    #[test]
    fn split_examples() {
        let p = e1(2);
        let g = p.group_roots(&[1.0], 10.0).unwrap();
        let sols = solve(&p, &[1.0], 10.0).unwrap();
        let (w1, w2) = split_by_group(&sols[0], &g).unwrap();
        assert_eq!(w1.terms.len(), 1);
        assert!((w1.terms[0].tau - c(0.0, 1.0)).norm() < 1e-12);
        assert!((w2.terms[0].tau - c(0.0, 101f64.sqrt())).norm() < 1e-12);
        for &t in &[0.0, 0.1, 1.0] {
            assert!((w1.eval(t) + w2.eval(t) - sols[0].eval(t)).norm() < 1e-14);
        }
        let ga = agmon(2).group_roots(&[1.0], 3.0).unwrap();
        let sa = solve(&agmon(2), &[1.0], 3.0).unwrap();
        let (a1, _) = split_by_group(&sa[0], &ga).unwrap();
        assert!(a1.terms.is_empty());
    }

    #[test]
    fn homogeneity_examples() {
        let p = e1(2);
        let h = homogeneity_check(&p, &[1.0], 10.0, 1.0, 1, 0).unwrap();
        assert!(h.rel_err < 1e-14);
        let h = homogeneity_check(&p, &[3.0], 7.0, 3.0, 2, 2).unwrap();
        assert!(h.rel_err < 1e-8);
        // j=1, l=0, r=2: the norm at (2ξ', 2λ) is 2^{-1/2} times the one at (ξ', λ)
        let base = solve(&p, &[1.0], 5.0).unwrap()[0].l2_norm();
        let big = solve(&p, &[2.0], 10.0).unwrap()[0].l2_norm();
        assert!((big / base - 2f64.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn json_dump_shape() {
        let s = solve_roots(&[c(0.0, 2.0)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s[0].to_json().unwrap()).unwrap();
        assert_eq!(v["terms"][0]["tau"], serde_json::json!([0.0, 2.0]));
        assert_eq!(v["terms"][0]["poly"], serde_json::json!([[1.0, 0.0]]));
    }

    proptest! {
        #[test]
        fn random_roots_satisfy_boundary_conditions(
            pts in proptest::collection::vec((-2.0f64..2.0, 0.2f64..3.0), 1..6)
        ) {
            let roots: Vec<C64> = pts.iter().map(|&(a, b)| c(a, b)).collect();
            let sols = solve_roots(&roots).unwrap();
            prop_assert!(boundary_defect(&sols) < 1e-7);
        }
    }
}
