//! Dense complex polynomials in one variable and their roots.
//!
//! Coefficients are stored in ascending order: `c[k]` multiplies `z^k`.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub fn eval(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::zero(), |acc, &a| acc * z + a)
}

/// `Σ |c_k| |z|^k`, the magnitude against which rounding in [`eval`] is judged.
pub fn eval_abs(c: &[C64], z: C64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

pub fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

pub fn nth_derivative(c: &[C64], order: usize) -> Vec<C64> {
    let mut d = c.to_vec();
    for _ in 0..order {
        d = derivative(&d);
    }
    d
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic `Π (z − r_k)`.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    roots.iter().fold(vec![C64::new(1.0, 0.0)], |acc, &r| mul(&acc, &[-r, C64::new(1.0, 0.0)]))
}

/// Taylor coefficients of `c` about `z0`.
pub fn taylor_shift(c: &[C64], z0: C64) -> Vec<C64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let next = out[k + 1];
            out[k] += z0 * next;
        }
    }
    out
}

/// Drops trailing (highest-order) zero coefficients.
pub fn trim(c: &[C64]) -> Vec<C64> {
    let mut v = c.to_vec();
    while v.len() > 1 && v.last().map_or(false, |x| x.is_zero()) {
        v.pop();
    }
    v
}

pub fn degree(c: &[C64]) -> usize {
    trim(c).len().saturating_sub(1)
}

/// A root together with its detected multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub root: C64,
    pub multiplicity: usize,
}

/// All roots with multiplicity, sorted by `(Im, Re)`.
///
/// Companion-matrix eigenvalues refined by Newton's method, then merged into
/// exact multiple roots where the data support it (see [`cluster_roots`]).
pub fn roots(c: &[C64]) -> Result<Vec<C64>> {
    Ok(expand(&roots_clustered(c)?))
}

pub fn roots_clustered(c: &[C64]) -> Result<Vec<RootCluster>> {
    let c = trim(c);
    if c.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidInput("zero polynomial has no finite root set".into()));
    }
    let zeros = c.iter().take_while(|x| x.is_zero()).count();
    let reduced = &c[zeros..];
    let mut raw = if reduced.len() > 1 { companion_roots(reduced)? } else { Vec::new() };
    for r in raw.iter_mut() {
        *r = polish(reduced, *r);
    }
    let mut clusters = cluster_roots(reduced, &raw);
    if zeros > 0 {
        clusters.push(RootCluster { root: C64::zero(), multiplicity: zeros });
    }
    clusters.sort_by(|a, b| cmp_root(a.root, b.root));
    Ok(clusters)
}

pub fn expand(clusters: &[RootCluster]) -> Vec<C64> {
    clusters.iter().flat_map(|c| std::iter::repeat(c.root).take(c.multiplicity)).collect()
}

pub fn cmp_root(a: C64, b: C64) -> std::cmp::Ordering {
    a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
}

/// Newton steps accepted only while `|p|` decreases.
pub fn polish(c: &[C64], z0: C64) -> C64 {
    let d = derivative(c);
    let mut z = z0;
    let mut fz = eval(c, z).norm();
    for _ in 0..60 {
        let dz = eval(&d, z);
        if dz.is_zero() || fz == 0.0 {
            break;
        }
        let step = eval(c, z) / dz;
        let cand = z - step;
        let fc = eval(c, cand).norm();
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
        if step.norm() <= 1e-17 * z.norm() {
            break;
        }
    }
    z
}

const LOOSE: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

/// Merges numerically split multiple roots.
///
/// A loose cluster of `k` roots is replaced by a `k`-fold root at the zero of
/// `p^{(k−1)}` nearest its mean when the implied cluster radius
/// `(k!·|p(z*)|/|p^{(k)}(z*)|)^{1/k}`, after discounting rounding in `p(z*)`,
/// stays below `1e-8·(1+|z*|)`. Clusters that fail are split at tighter
/// thresholds.
pub fn cluster_roots(c: &[C64], raw: &[C64]) -> Vec<RootCluster> {
    let mut out = Vec::new();
    split_level(c, raw.to_vec(), 0, &mut out);
    out
}

fn split_level(c: &[C64], pts: Vec<C64>, level: usize, out: &mut Vec<RootCluster>) {
    if level >= LOOSE.len() {
        out.extend(pts.into_iter().map(|root| RootCluster { root, multiplicity: 1 }));
        return;
    }
    for group in single_linkage(&pts, |z| LOOSE[level] * (1.0 + z.norm())) {
        let members: Vec<C64> = group.iter().map(|&i| pts[i]).collect();
        if members.len() == 1 {
            out.push(RootCluster { root: members[0], multiplicity: 1 });
            continue;
        }
        match merge(c, &members) {
            Some(root) => out.push(RootCluster { root, multiplicity: members.len() }),
            None => split_level(c, members, level + 1, out),
        }
    }
}

fn merge(c: &[C64], members: &[C64]) -> Option<C64> {
    let k = members.len();
    let mean = members.iter().sum::<C64>() / k as f64;
    let dk1 = nth_derivative(c, k - 1);
    let z = polish(&dk1, mean);
    let dk = nth_derivative(c, k);
    let pk = eval(&dk, z).norm();
    if pk == 0.0 {
        return None;
    }
    let rounding = 4.0 * f64::EPSILON * c.len() as f64 * eval_abs(c, z);
    let excess = (eval(c, z).norm() - rounding).max(0.0);
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    let radius = (fact * excess / pk).powf(1.0 / k as f64);
    // Rounding alone splits a k-fold root by about this much.
    let noise = (fact * rounding / pk).powf(1.0 / k as f64);
    let spread = members.iter().map(|m| (m - z).norm()).fold(0.0, f64::max);
    let tol = 1e-8 * (1.0 + z.norm());
    (radius < tol && spread <= 3.0 * noise + tol).then_some(z)
}

/// Connected components of the graph joining points closer than `thresh`.
pub fn single_linkage(pts: &[C64], thresh: impl Fn(C64) -> f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let t = thresh(pts[i]).min(thresh(pts[j]));
            if (pts[i] - pts[j]).norm() <= t {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Eigenvalues of the (balanced) companion matrix of a polynomial with
/// nonzero constant term.
fn companion_roots(c: &[C64]) -> Result<Vec<C64>> {
    let n = c.len() - 1;
    let lead = c[n];
    if n == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    let mut h = vec![vec![C64::zero(); n]; n];
    for k in 0..n {
        h[0][k] = -c[n - 1 - k] / lead;
    }
    for k in 1..n {
        h[k][k - 1] = C64::new(1.0, 0.0);
    }
    balance(&mut h);
    hessenberg_qr(h)
}

// Parlett–Reinsch balancing with radix 2.
fn balance(a: &mut [Vec<C64>]) {
    let n = a.len();
    let radix = 2.0_f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += a[j][i].l1_norm();
                    row += a[i][j].l1_norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let s = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix * radix;
            }
            if (col + row) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[i][j] /= f;
                }
                for j in 0..n {
                    a[j][i] *= f;
                }
            }
        }
    }
}

// Complex single-shift QR on an upper Hessenberg matrix.
fn hessenberg_qr(mut h: Vec<Vec<C64>>) -> Result<Vec<C64>> {
    let n = h.len();
    let mut eig = vec![C64::zero(); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let s = h[lo - 1][lo - 1].norm() + h[lo][lo].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[lo][lo - 1].norm() <= f64::EPSILON * s {
                h[lo][lo - 1] = C64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::NoConvergence);
        }
        let shift = if iter % 10 == 0 {
            h[hi][hi] + C64::new(0.75 * h[hi][hi - 1].norm(), 0.4 * h[hi][hi - 1].norm())
        } else {
            wilkinson(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        for k in lo..=hi {
            h[k][k] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (g11, g12, g21, g22) = if r == 0.0 {
                (C64::new(1.0, 0.0), C64::zero(), C64::zero(), C64::new(1.0, 0.0))
            } else {
                (x.conj() / r, y.conj() / r, -y / r, x / r)
            };
            for col in k..=hi {
                let (a, b) = (h[k][col], h[k + 1][col]);
                h[k][col] = g11 * a + g12 * b;
                h[k + 1][col] = g21 * a + g22 * b;
            }
            rots.push((g11, g12, g21, g22));
        }
        for (idx, &(g11, g12, g21, g22)) in rots.iter().enumerate() {
            let k = lo + idx;
            for row in lo..=(k + 1).min(hi) {
                let (a, b) = (h[row][k], h[row][k + 1]);
                h[row][k] = a * g11.conj() + b * g12.conj();
                h[row][k + 1] = a * g21.conj() + b * g22.conj();
            }
        }
        for k in lo..=hi {
            h[k][k] += shift;
        }
    }
    Ok(eig)
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let m1 = tr * 0.5 + disc;
    let m2 = tr * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string().chars().map(|d| DIGITS[d.to_digit(10).unwrap() as usize]).collect()
}

fn short(x: f64) -> String {
    let v: f64 = format!("{:.10e}", x).parse().unwrap_or(x);
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{}", v)
    }
}

/// Compact text for a complex number, e.g. `i`, `-2.5i`, `1+3i`.
///
/// Components below `1e-12` of the modulus are dropped.
pub fn format_complex(z: C64) -> String {
    let scale = z.norm();
    let re = if z.re.abs() <= 1e-12 * scale { 0.0 } else { z.re };
    let im = if z.im.abs() <= 1e-12 * scale { 0.0 } else { z.im };
    let im_text = |v: f64| match short(v).as_str() {
        "1" => "i".to_string(),
        "-1" => "-i".to_string(),
        t => format!("{t}i"),
    };
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".into(),
        (false, true) => short(re),
        (true, false) => im_text(im),
        (false, false) => {
            let it = im_text(im.abs());
            format!("{}{}{}", short(re), if im < 0.0 { "-" } else { "+" }, it)
        }
    }
}

/// Polynomial in descending powers, e.g. `τ²+1`.
pub fn format_poly(c: &[C64], var: &str) -> String {
    let c = trim(c);
    let mut out = String::new();
    for k in (0..c.len()).rev() {
        let a = c[k];
        if a.is_zero() {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}{}", superscript(k)),
        };
        let real = a.im.abs() <= 1e-12 * a.norm();
        let body = if real {
            let v = a.re.abs();
            if k > 0 && short(v) == "1" {
                mono
            } else {
                format!("{}{}", short(v), mono)
            }
        } else {
            format!("({}){}", format_complex(a), mono)
        };
        let negative = real && a.re < 0.0;
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push(if negative { '-' } else { '+' });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
