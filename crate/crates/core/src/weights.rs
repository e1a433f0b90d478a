//! Weight functions attached to Newton polygons.
//!
//! `Ξ_P(ξ, λ) = Σ |ξ|^i λ^k` over the lattice points of a polygon is
//! equivalent (for `λ ≥ λ₀`) to a product `Π_s (|ξ|² + λ^{2/r_s})^{m_s}` with
//! one factor per non-axis side, where `2m_s` is the side's horizontal width.
//! [`ProductWeight`] stores that product; exponents are rationals so the
//! energy weight of an odd `μ` (half-integer `m_s`) is representable.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygon::{ratio_to_f64, rational_str, NewtonPolygon, Rational, Slope};
use crate::quad;

/// Band constant used by [`Lemma32::within_band`]; the integral stays within
/// `[shape/C, C·shape]` for every parameter set exercised by the test suite.
pub const LEMMA32_CONSTANT: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub r: Slope,
    #[serde(with = "rational_str")]
    pub m: Rational,
}

impl Factor {
    pub fn new(r: Slope, m: Rational) -> Self {
        Factor { r, m }
    }
}

fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// `Π (|ξ|² + λ^{2/r_s})^{m_s}`, with `λ^{2/∞} = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductWeight {
    pub factors: Vec<Factor>,
    pub lambda0: f64,
    /// Constant `λ^p` factor; nonzero only for polygons lying on the λ-axis.
    #[serde(default, skip_serializing_if = "is_zero", with = "rational_str")]
    pub lambda_power: Rational,
    #[serde(default, skip_serializing_if = "is_false")]
    pub degenerate: bool,
}

/// Same factors as [`ProductWeight`], but the `r = ∞` factor reads `|ξ|²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousWeight {
    pub factors: Vec<Factor>,
}

fn validate(factors: &[Factor]) -> Result<()> {
    if let Some(f) = factors.iter().find(|f| !f.m.is_positive()) {
        return Err(Error::InvalidInput(format!("factor exponent must be positive, got {}", f.m)));
    }
    for w in factors.windows(2) {
        if w[0].r <= w[1].r {
            return Err(Error::InvalidInput(format!(
                "slopes must strictly decrease, got {} then {}",
                w[0].r, w[1].r
            )));
        }
    }
    if let Some(f) = factors.iter().find(|f| matches!(f.r, Slope::Finite(r) if !r.is_positive())) {
        return Err(Error::InvalidInput(format!("slope must be positive, got {}", f.r)));
    }
    Ok(())
}

fn total(factors: &[Factor]) -> Rational {
    factors.iter().fold(Rational::zero(), |acc, f| acc + f.m)
}

/// 1-based `κ` with `2(m_1+…+m_{κ−1}) ≤ s < 2(m_1+…+m_κ)`.
fn kappa_of(factors: &[Factor], s: Rational) -> Result<usize> {
    if s.is_negative() {
        return Err(Error::OutOfRange(format!("shift {s} is negative")));
    }
    let two = Rational::from_integer(2);
    let mut partial = Rational::zero();
    for (idx, f) in factors.iter().enumerate() {
        partial += f.m;
        if s < two * partial {
            return Ok(idx + 1);
        }
    }
    Err(Error::OutOfRange(format!(
        "s = {s} is not below 2·Σm = {}",
        two * total(factors)
    )))
}

fn shift_factors(factors: &[Factor], s: Rational) -> Result<Vec<Factor>> {
    if s.is_zero() {
        return Ok(factors.to_vec());
    }
    let kappa = kappa_of(factors, s)?;
    let partial: Rational = factors[..kappa].iter().fold(Rational::zero(), |acc, f| acc + f.m);
    let mut out = Vec::with_capacity(factors.len() - kappa + 1);
    out.push(Factor::new(factors[kappa - 1].r, partial - s / 2));
    out.extend_from_slice(&factors[kappa..]);
    Ok(out)
}

fn eval_factors(factors: &[Factor], xi: f64, lambda: f64, homogeneous: bool) -> f64 {
    let xi2 = xi * xi;
    factors
        .iter()
        .map(|f| {
            let base = match f.r {
                Slope::Infinite if homogeneous => xi2,
                r => xi2 + r.lambda_power(lambda),
            };
            base.powf(ratio_to_f64(f.m))
        })
        .product()
}

impl ProductWeight {
    pub fn new(factors: Vec<Factor>, lambda0: f64) -> Result<Self> {
        validate(&factors)?;
        if !(lambda0 > 0.0) {
            return Err(Error::InvalidInput(format!("lambda0 must be positive, got {lambda0}")));
        }
        Ok(ProductWeight { factors, lambda0, lambda_power: Rational::zero(), degenerate: false })
    }

    /// One factor `(r_s, (a_{s+1} − a_s)/2)` per non-axis side.
    ///
    /// Degenerate polygons give constant-in-λ weights (ξ-axis segment) or a
    /// pure power of λ (λ-axis segment); both are flagged.
    pub fn from_polygon(np: &NewtonPolygon) -> Self {
        if np.is_degenerate() {
            let a = np.max_i();
            let factors = if a > 0 {
                vec![Factor::new(Slope::Infinite, Rational::new(a, 2))]
            } else {
                Vec::new()
            };
            return ProductWeight {
                factors,
                lambda0: 1.0,
                lambda_power: Rational::from_integer(if a > 0 { 0 } else { np.max_k() }),
                degenerate: true,
            };
        }
        let factors = np
            .sides()
            .iter()
            .map(|side| Factor::new(side.r, Rational::new(side.width(), 2)))
            .collect();
        ProductWeight { factors, lambda0: 1.0, lambda_power: Rational::zero(), degenerate: false }
    }

    /// Energy weight `≈ (1+|ξ|)^μ (λ+|ξ|)^{m−μ}` of the polygon `N_{m,μ}`.
    pub fn energy(m: i64, mu: i64) -> Result<Self> {
        if !(m > mu && mu >= 0) {
            return Err(Error::InvalidInput(format!("need m > mu >= 0, got m={m}, mu={mu}")));
        }
        let np = NewtonPolygon::from_pairs(&[(m, 0), (mu, m - mu)])?;
        Ok(Self::from_polygon(&np))
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    /// `Σ m_s`; the weight grows like `|ξ|^{2Σm}`.
    pub fn total_exponent(&self) -> Rational {
        total(&self.factors)
    }

    pub fn eval(&self, xi: f64, lambda: f64) -> f64 {
        eval_factors(&self.factors, xi, lambda, false) * lambda.powf(ratio_to_f64(self.lambda_power))
    }

    pub fn homogeneous(&self) -> HomogeneousWeight {
        HomogeneousWeight { factors: self.factors.clone() }
    }

    pub fn kappa_index(&self, s: Rational) -> Result<usize> {
        kappa_of(&self.factors, s)
    }

    /// Weight of the polygon shifted `s` to the left and cut at the ordinate axis.
    pub fn shift(&self, s: Rational) -> Result<ProductWeight> {
        Ok(ProductWeight {
            factors: shift_factors(&self.factors, s)?,
            lambda0: self.lambda0,
            lambda_power: self.lambda_power,
            degenerate: self.degenerate,
        })
    }

    /// Like [`shift`](Self::shift) but also accepts `s = 2Σm`, which leaves
    /// only the λ-power.
    pub fn shift_inclusive(&self, s: Rational) -> Result<ProductWeight> {
        if s == Rational::from_integer(2) * self.total_exponent() {
            return Ok(ProductWeight { factors: Vec::new(), ..self.clone() });
        }
        self.shift(s)
    }

    /// `r_s`-degree of side `s` (1-based) predicted from the factor list:
    /// `2(Σ_{j≤s} m_j + Σ_{j>s} (r_s/r_j)·m_j)`.
    ///
    /// `second_sum_uses_own_m` switches to the alternative reading with `m_s`
    /// in the second sum.
    pub fn side_degree(&self, s: usize, second_sum_uses_own_m: bool) -> Result<Rational> {
        if s == 0 || s > self.factors.len() {
            return Err(Error::OutOfRange(format!("side index {s}")));
        }
        let rs = match self.factors[s - 1].r {
            Slope::Finite(r) => r,
            Slope::Infinite => {
                return Err(Error::OutOfRange("r-degree is undefined for r = ∞".into()))
            }
        };
        let mut d = total(&self.factors[..s]);
        for f in &self.factors[s..] {
            let rj = match f.r {
                Slope::Finite(r) => r,
                Slope::Infinite => unreachable!("only the first slope may be infinite"),
            };
            let m = if second_sum_uses_own_m { self.factors[s - 1].m } else { f.m };
            d += rs / rj * m;
        }
        Ok(d * 2)
    }
}

impl HomogeneousWeight {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        validate(&factors)?;
        Ok(HomogeneousWeight { factors })
    }

    pub fn eval(&self, xi: f64, lambda: f64) -> f64 {
        eval_factors(&self.factors, xi, lambda, true)
    }

    pub fn total_exponent(&self) -> Rational {
        total(&self.factors)
    }

    pub fn shift(&self, s: Rational) -> Result<HomogeneousWeight> {
        Ok(HomogeneousWeight { factors: shift_factors(&self.factors, s)? })
    }

    pub fn shift_inclusive(&self, s: Rational) -> Result<HomogeneousWeight> {
        if s == Rational::from_integer(2) * self.total_exponent() {
            return Ok(HomogeneousWeight { factors: Vec::new() });
        }
        self.shift(s)
    }
}

/// `Σ |ξ|^i λ^k` over every lattice point of the polygon.
pub fn xi_sum_eval(np: &NewtonPolygon, xi: f64, lambda: f64) -> f64 {
    np.integer_points()
        .iter()
        .map(|p| xi.powi(p.i as i32) * lambda.powi(p.k as i32))
        .sum()
}

/// `∫_ℝ t^{2l} / Π (t² + a_s²)^{2m_s} dt` for positive `a_s` in any order.
pub fn rational_integral(a: &[f64], m: &[f64], l: u32) -> Result<f64> {
    if a.len() != m.len() || a.is_empty() {
        return Err(Error::InvalidInput("need one exponent per a_s".into()));
    }
    if let Some(x) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput(format!("a_s must be positive and finite, got {x}")));
    }
    let big_m: f64 = m.iter().sum();
    let decay = 2.0 * l as f64 - 4.0 * big_m;
    if decay + 1.0 >= 0.0 {
        return Err(Error::OutOfRange(format!(
            "integral diverges: l = {l} with 2Σm = {}",
            2.0 * big_m
        )));
    }
    let two_l = 2.0 * l as f64;
    let a_min = a.iter().copied().fold(f64::INFINITY, f64::min);
    let a_max = a.iter().copied().fold(0.0, f64::max);
    let ln_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();

    // t = e^x; ln(t² + a²) evaluated without overflow.
    let log_integrand = |x: f64| -> f64 {
        let mut acc = two_l * x + x;
        for (la, ms) in ln_a.iter().zip(m) {
            let (u, v) = (2.0 * x, 2.0 * la);
            let hi = u.max(v);
            acc -= 2.0 * ms * (hi + (-(u - v).abs()).exp().ln_1p());
        }
        acc
    };
    // Scale by the value at the largest a to keep the panel sums O(1).
    let scale_log = log_integrand(a_max.ln());
    let integrand = |x: f64| (log_integrand(x) - scale_log).exp();

    let t0 = 1e-3 * a_min;
    let t1 = 1e3 * a_max;
    let breaks: Vec<f64> = ln_a.clone();
    let mid = quad::integrate(integrand, t0.ln(), t1.ln(), &breaks, 1e-13, 20_000)?.value;
    let mid = mid * scale_log.exp();

    let p0: f64 = a.iter().zip(m).map(|(x, ms)| x.powf(-4.0 * ms)).product();
    let inv_sq: f64 = a.iter().zip(m).map(|(x, ms)| 2.0 * ms / (x * x)).sum();
    let left = p0
        * (t0.powf(two_l + 1.0) / (two_l + 1.0) - inv_sq * t0.powf(two_l + 3.0) / (two_l + 3.0));
    let sq: f64 = a.iter().zip(m).map(|(x, ms)| 2.0 * ms * x * x).sum();
    let right = t1.powf(decay + 1.0) / (-decay - 1.0) - sq * t1.powf(decay - 1.0) / (1.0 - decay);

    Ok(2.0 * (left + mid + right))
}

/// Quadrature value of a two-sided integral together with its predicted
/// order of magnitude `a_κ^{2l+1−4(m_1+…+m_κ)} Π_{s>κ} a_s^{−4m_s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma32 {
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub kappa: usize,
}

impl Lemma32 {
    /// `value / shape`; lies in `[1/C, C]`.
    pub fn ratio(&self) -> f64 {
        self.value / self.lower_bound
    }

    pub fn within_band(&self, c: f64) -> bool {
        self.lower_bound / c <= self.value && self.value <= c * self.upper_bound
    }
}

pub fn lemma32_integral(a: &[f64], m: &[Rational], l: u32) -> Result<Lemma32> {
    if a.len() != m.len() || a.is_empty() {
        return Err(Error::InvalidInput("need one exponent per a_s".into()));
    }
    if a[0] <= 0.0 || a.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("a must be positive and non-decreasing".into()));
    }
    let factors: Vec<Factor> = m.iter().map(|&ms| Factor::new(Slope::Infinite, ms)).collect();
    if let Some(f) = factors.iter().find(|f| !f.m.is_positive()) {
        return Err(Error::InvalidInput(format!("m_s must be positive, got {}", f.m)));
    }
    let kappa = kappa_of(&factors, Rational::from_integer(l as i64))?;
    let m_f: Vec<f64> = m.iter().map(|&x| ratio_to_f64(x)).collect();
    let value = rational_integral(a, &m_f, l)?;
    let partial: f64 = m_f[..kappa].iter().sum();
    let mut shape = a[kappa - 1].powf(2.0 * l as f64 + 1.0 - 4.0 * partial);
    for (x, ms) in a[kappa..].iter().zip(&m_f[kappa..]) {
        shape *= x.powf(-4.0 * ms);
    }
    Ok(Lemma32 { value, lower_bound: shape, upper_bound: shape, kappa })
}

/// `σ'_l(ξ', λ) = (∫ ξ_n^{2l} / Ξ²(ξ', ξ_n, λ) dξ_n)^{−1/2}`.
pub fn trace_weight_quadrature(w: &ProductWeight, l: u32, xi_prime: f64, lambda: f64) -> Result<f64> {
    if Rational::from_integer(l as i64) >= Rational::from_integer(2) * w.total_exponent() {
        return Err(Error::OutOfRange(format!(
            "l = {l} is not below 2Σm = {}",
            Rational::from_integer(2) * w.total_exponent()
        )));
    }
    if lambda < w.lambda0 {
        return Err(Error::OutOfRange(format!("lambda {lambda} below lambda0 {}", w.lambda0)));
    }
    let a: Vec<f64> = w
        .factors
        .iter()
        .map(|f| (xi_prime * xi_prime + f.r.lambda_power(lambda)).sqrt())
        .collect();
    let m: Vec<f64> = w.factors.iter().map(|f| ratio_to_f64(f.m)).collect();
    let value = rational_integral(&a, &m, l)?;
    Ok(value.powf(-0.5) * lambda.powf(ratio_to_f64(w.lambda_power)))
}

/// `l + 1/2` as a rational shift.
pub fn half_shift(l: u32) -> Rational {
    Ratio::new(2 * l as i64 + 1, 2)
}

pub fn one() -> Rational {
    Rational::one()
}
