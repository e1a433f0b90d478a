//! Newton polygons of two-variable exponent sets.
//!
//! A polynomial `P(ξ, λ) = Σ a_{αk} ξ^α λ^k` contributes the lattice point
//! `(|α|, k)` for every nonzero coefficient. The Newton polygon is the convex
//! hull of those points, their projections on both axes and the origin. Its
//! non-axis sides `Γ_s` are walked clockwise from the top-left vertex
//! `(0, b_1)` to the bottom-right vertex `(a_{S+1}, 0)`; side `s` lies on the
//! line `a + r_s·b = d_s`.
//!
//! All geometry is exact: vertices are integers, slopes and degrees are
//! rationals.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Exponent point `(i, k)`: total ξ-degree and λ-degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub i: i64,
    pub k: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { i: 0, k: 0 };

    pub fn new(i: i64, k: i64) -> Self {
        LatticePoint { i, k }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.k)
    }
}

/// Exterior-normal slope of a side; `Infinite` marks a horizontal first side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slope {
    Finite(Rational),
    Infinite,
}

impl Slope {
    pub fn integer(r: i64) -> Self {
        Slope::Finite(Rational::from_integer(r))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Slope::Infinite)
    }

    /// `λ^{2/r}` with the convention `λ^{2/∞} = 1`.
    pub fn lambda_power(&self, lambda: f64) -> f64 {
        match self {
            Slope::Infinite => 1.0,
            Slope::Finite(r) => lambda.powf(2.0 / ratio_to_f64(*r)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Slope::Infinite => f64::INFINITY,
            Slope::Finite(r) => ratio_to_f64(*r),
        }
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Slope::Infinite, Slope::Infinite) => Ordering::Equal,
            (Slope::Infinite, _) => Ordering::Greater,
            (_, Slope::Infinite) => Ordering::Less,
            (Slope::Finite(a), Slope::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Infinite => write!(f, "inf"),
            Slope::Finite(r) => write!(f, "{}", r),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "inf" {
            return Ok(Slope::Infinite);
        }
        parse_rational(&text)
            .map(Slope::Finite)
            .map_err(serde::de::Error::custom)
    }
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `"p"` or `"p/q"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("not a rational: {text:?}"));
    let mut parts = text.trim().splitn(2, '/');
    let numer: i64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let denom: i64 = match parts.next() {
        Some(q) => q.trim().parse().map_err(|_| bad())?,
        None => 1,
    };
    if denom == 0 {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_str {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// The `r`-degree `max (a + r·b)` over the polygon.
///
/// For `r = ∞` there is no scalar degree; we report the height `b_1` of the
/// top edge and the largest abscissa `a_2` reached on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree {
    Finite(#[serde(with = "rational_str")] Rational),
    Horizontal { height: i64, reach: i64 },
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(d) => write!(f, "{}", d),
            Degree::Horizontal { height, reach } => write!(f, "(b1={}, a2={})", height, reach),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Side {
    pub r: Slope,
    pub degree: Degree,
    pub from: LatticePoint,
    pub to: LatticePoint,
}

impl Side {
    /// Horizontal extent `a_{s+1} − a_s`.
    pub fn width(&self) -> i64 {
        self.to.i - self.from.i
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        let on_line = match self.degree {
            Degree::Finite(d) => {
                Rational::from_integer(p.i) + line_slope(self.r) * p.k == d
            }
            Degree::Horizontal { height, .. } => p.k == height,
        };
        on_line && p.i >= self.from.i && p.i <= self.to.i
    }
}

fn line_slope(r: Slope) -> Rational {
    match r {
        Slope::Finite(r) => r,
        Slope::Infinite => unreachable!("horizontal sides carry Degree::Horizontal"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    /// `(0, b_1), (a_2, b_2), …, (a_{S+1}, 0)`, clockwise.
    chain: Vec<LatticePoint>,
    /// All hull vertices, counter-clockwise from the origin.
    hull: Vec<LatticePoint>,
    sides: Vec<Side>,
}

impl NewtonPolygon {
    /// Hull of the points, their axis projections and the origin.
    pub fn build(points: &[LatticePoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        if let Some(p) = points.iter().find(|p| p.i < 0 || p.k < 0) {
            return Err(Error::InvalidInput(format!("negative exponent point {p}")));
        }
        let mut cloud = vec![LatticePoint::ORIGIN];
        for &p in points {
            cloud.push(p);
            cloud.push(LatticePoint::new(p.i, 0));
            cloud.push(LatticePoint::new(0, p.k));
        }
        let hull = convex_hull(cloud);
        let i_max = hull.iter().map(|p| p.i).max().unwrap_or(0);
        let k_max = hull.iter().map(|p| p.k).max().unwrap_or(0);

        if i_max == 0 || k_max == 0 {
            let top = LatticePoint::new(0, k_max);
            let right = LatticePoint::new(i_max, 0);
            let chain = if top == right { vec![top] } else { vec![top, right] };
            return Ok(NewtonPolygon { chain, hull, sides: Vec::new() });
        }

        let pos = |q: LatticePoint| hull.iter().position(|&p| p == q).expect("corner on hull");
        let start = pos(LatticePoint::new(i_max, 0));
        let end = pos(LatticePoint::new(0, k_max));
        let mut chain = Vec::new();
        let mut idx = start;
        loop {
            chain.push(hull[idx]);
            if idx == end {
                break;
            }
            idx = (idx + 1) % hull.len();
        }
        chain.reverse();

        let mut sides = Vec::with_capacity(chain.len() - 1);
        for pair in chain.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            let da = to.i - from.i;
            let db = from.k - to.k;
            let side = if db == 0 {
                Side {
                    r: Slope::Infinite,
                    degree: Degree::Horizontal { height: from.k, reach: to.i },
                    from,
                    to,
                }
            } else if da == 0 {
                return Err(Error::UnsupportedShape(format!(
                    "last side {from}-{to} is vertical (r = 0)"
                )));
            } else {
                let r = Rational::new(da, db);
                Side {
                    r: Slope::Finite(r),
                    degree: Degree::Finite(Rational::from_integer(from.i) + r * from.k),
                    from,
                    to,
                }
            };
            sides.push(side);
        }
        Ok(NewtonPolygon { chain, hull, sides })
    }

    /// Newton polygon of a single generator set given as `(i, k)` pairs.
    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        let pts: Vec<_> = pairs.iter().map(|&(i, k)| LatticePoint::new(i, k)).collect();
        Self::build(&pts)
    }

    pub fn chain(&self) -> &[LatticePoint] {
        &self.chain
    }

    pub fn hull_vertices(&self) -> &[LatticePoint] {
        &self.hull
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    /// No non-axis sides: a single point or a segment on one axis.
    pub fn is_degenerate(&self) -> bool {
        self.sides.is_empty()
    }

    pub fn max_i(&self) -> i64 {
        self.hull.iter().map(|p| p.i).max().unwrap_or(0)
    }

    pub fn max_k(&self) -> i64 {
        self.hull.iter().map(|p| p.k).max().unwrap_or(0)
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        if p.i < 0 || p.k < 0 || p.i > self.max_i() || p.k > self.max_k() {
            return false;
        }
        self.sides.iter().all(|side| match side.degree {
            Degree::Finite(d) => Rational::from_integer(p.i) + line_slope(side.r) * p.k <= d,
            Degree::Horizontal { height, .. } => p.k <= height,
        })
    }

    /// Every lattice point of the closed polygon, sorted by `(k, i)`.
    pub fn integer_points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        for k in 0..=self.max_k() {
            for i in 0..=self.max_i() {
                let p = LatticePoint::new(i, k);
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Support function of the polygon in direction `(1, r)`.
    pub fn r_degree(&self, r: Slope) -> Degree {
        match r {
            Slope::Finite(r) => {
                let d = self
                    .hull
                    .iter()
                    .map(|p| Rational::from_integer(p.i) + r * p.k)
                    .max()
                    .unwrap_or_else(Rational::zero);
                Degree::Finite(d)
            }
            Slope::Infinite => {
                let height = self.max_k();
                let reach = self
                    .hull
                    .iter()
                    .filter(|p| p.k == height)
                    .map(|p| p.i)
                    .max()
                    .unwrap_or(0);
                Degree::Horizontal { height, reach }
            }
        }
    }
}

fn cross(o: LatticePoint, a: LatticePoint, b: LatticePoint) -> i64 {
    (a.i - o.i) * (b.k - o.k) - (a.k - o.k) * (b.i - o.i)
}

/// Andrew's monotone chain; collinear points are dropped, output is
/// counter-clockwise starting from the smallest `(i, k)`.
fn convex_hull(mut pts: Vec<LatticePoint>) -> Vec<LatticePoint> {
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<LatticePoint> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<LatticePoint> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// One monomial `coeff · ξ^α · λ^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub alpha: Vec<u32>,
    pub k: u32,
    pub coeff: Complex64,
}

impl Monomial {
    pub fn xi_degree(&self) -> i64 {
        self.alpha.iter().map(|&a| a as i64).sum()
    }

    pub fn point(&self) -> LatticePoint {
        LatticePoint::new(self.xi_degree(), self.k as i64)
    }
}

/// Coefficient table of a polynomial in `(ξ, λ)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyTable {
    pub terms: Vec<Monomial>,
}

impl PolyTable {
    pub fn new(terms: Vec<Monomial>) -> Self {
        PolyTable { terms }
    }

    /// `ν(P)`: exponent points of the nonzero coefficients.
    pub fn support(&self) -> Vec<LatticePoint> {
        let mut pts: Vec<_> = self
            .terms
            .iter()
            .filter(|t| t.coeff != Complex64::zero())
            .map(Monomial::point)
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

    /// Terms on the supporting line of direction `(1, r)`.
    ///
    /// For `r = ∞` the kept terms are those with `k = b_1` and `|α| = a_2`.
    pub fn principal_part(&self, r: Slope) -> Result<PolyTable> {
        if self.terms.is_empty() {
            return Err(Error::InvalidInput("empty polynomial".into()));
        }
        let live: Vec<&Monomial> =
            self.terms.iter().filter(|t| t.coeff != Complex64::zero()).collect();
        let kept = match r {
            Slope::Finite(r) => {
                if !r.is_positive() {
                    return Err(Error::InvalidInput(format!("slope must be positive, got {r}")));
                }
                let weight = |t: &Monomial| Rational::from_integer(t.xi_degree()) + r * t.k as i64;
                let d = live.iter().map(|t| weight(t)).max();
                live.into_iter().filter(|t| Some(weight(t)) == d).cloned().collect()
            }
            Slope::Infinite => {
                let b1 = live.iter().map(|t| t.k).max();
                let a2 = live.iter().filter(|t| Some(t.k) == b1).map(|t| t.xi_degree()).max();
                live.into_iter()
                    .filter(|t| Some(t.k) == b1 && Some(t.xi_degree()) == a2)
                    .cloned()
                    .collect()
            }
        };
        Ok(PolyTable { terms: kept })
    }
}

/// Terms of `c·|ξ|^{2p}·λ^k` expanded in `n` variables.
pub fn radial_monomials(n: usize, p: u32, k: u32, c: Complex64) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut alpha = vec![0u32; n];
    expand_radial(n, 0, p, 1.0, &mut alpha, &mut |alpha, mult| {
        out.push(Monomial { alpha: alpha.to_vec(), k, coeff: c * mult });
    });
    out
}

// Multinomial expansion of (ξ_1² + … + ξ_n²)^p.
fn expand_radial(
    n: usize,
    var: usize,
    remaining: u32,
    mult: f64,
    alpha: &mut Vec<u32>,
    emit: &mut dyn FnMut(&[u32], f64),
) {
    if n == 0 {
        if remaining == 0 {
            emit(alpha, mult);
        }
        return;
    }
    if var == n - 1 {
        alpha[var] = 2 * remaining;
        emit(alpha, mult);
        alpha[var] = 0;
        return;
    }
    for q in 0..=remaining {
        alpha[var] = 2 * q;
        let binom = binomial(remaining as u64, q as u64) as f64;
        expand_radial(n, var + 1, remaining - q, mult * binom, alpha, emit);
    }
    alpha[var] = 0;
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(pairs: &[(i64, i64)]) -> Vec<LatticePoint> {
        pairs.iter().map(|&(i, k)| LatticePoint::new(i, k)).collect()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn two_generator_polygon() {
        let np = NewtonPolygon::from_pairs(&[(4, 0), (2, 2)]).unwrap();
        assert_eq!(np.hull_vertices(), pts(&[(0, 0), (4, 0), (2, 2), (0, 2)]).as_slice());
        assert_eq!(np.chain(), pts(&[(0, 2), (2, 2), (4, 0)]).as_slice());
        let sides = np.sides();
        assert_eq!(sides.len(), 2);
        assert_eq!(sides[0].r, Slope::Infinite);
        assert_eq!(sides[0].from, LatticePoint::new(0, 2));
        assert_eq!(sides[0].to, LatticePoint::new(2, 2));
        assert_eq!(sides[1].r, Slope::integer(1));
        assert_eq!(sides[1].degree, Degree::Finite(q(4, 1)));
    }

    #[test]
    fn origin_only_is_degenerate() {
        let np = NewtonPolygon::from_pairs(&[(0, 0)]).unwrap();
        assert!(np.is_degenerate());
        assert_eq!(np.hull_vertices(), pts(&[(0, 0)]).as_slice());
        assert_eq!(np.integer_points(), pts(&[(0, 0)]));
        assert_eq!(np.r_degree(Slope::integer(3)), Degree::Finite(q(0, 1)));
    }

    #[test]
    fn axis_segments_are_degenerate() {
        let np = NewtonPolygon::from_pairs(&[(2, 0)]).unwrap();
        assert!(np.is_degenerate());
        assert_eq!(np.integer_points().len(), 3);
        let np = NewtonPolygon::from_pairs(&[(0, 3)]).unwrap();
        assert!(np.is_degenerate());
        assert_eq!(np.max_k(), 3);
    }

    #[test]
    fn fig2_shape() {
        for (m, mu) in [(2, 1), (3, 1), (4, 3), (5, 2)] {
            let np = NewtonPolygon::from_pairs(&[(2 * m, 0), (2 * mu, 2 * m - 2 * mu)]).unwrap();
            assert_eq!(
                np.hull_vertices(),
                pts(&[(0, 0), (2 * m, 0), (2 * mu, 2 * m - 2 * mu), (0, 2 * m - 2 * mu)]).as_slice()
            );
            assert_eq!(np.sides()[0].r, Slope::Infinite);
            assert_eq!(np.sides()[1].r, Slope::integer(1));
            assert_eq!(np.sides()[1].degree, Degree::Finite(q(2 * m, 1)));
        }
    }

    #[test]
    fn vertical_last_side_rejected() {
        let err = NewtonPolygon::from_pairs(&[(2, 2)]).unwrap_err();
        assert!(matches!(err, Error::UnsupportedShape(_)));
        let err = NewtonPolygon::from_pairs(&[(4, 0), (4, 1), (0, 3)]).unwrap_err();
        assert!(matches!(err, Error::UnsupportedShape(_)));
    }

    #[test]
    fn negative_point_rejected() {
        assert!(NewtonPolygon::from_pairs(&[(-1, 0)]).is_err());
        assert!(NewtonPolygon::build(&[]).is_err());
    }

    #[test]
    fn r_degree_examples() {
        let np = NewtonPolygon::from_pairs(&[(4, 0), (2, 2)]).unwrap();
        assert_eq!(np.r_degree(Slope::integer(1)), Degree::Finite(q(4, 1)));
        assert_eq!(np.r_degree(Slope::integer(2)), Degree::Finite(q(6, 1)));
        assert_eq!(np.r_degree(Slope::Infinite), Degree::Horizontal { height: 2, reach: 2 });
    }

    #[test]
    fn three_sided_polygon_slopes() {
        let np = NewtonPolygon::from_pairs(&[(0, 4), (2, 3), (6, 0)]).unwrap();
        let rs: Vec<_> = np.sides().iter().map(|s| s.r).collect();
        assert_eq!(rs, vec![Slope::Finite(q(2, 1)), Slope::Finite(q(4, 3))]);
        assert_eq!(np.sides()[0].degree, Degree::Finite(q(8, 1)));
        assert_eq!(np.sides()[1].degree, Degree::Finite(q(6, 1)));
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let np = NewtonPolygon::from_pairs(&[(4, 0), (2, 2), (3, 1), (1, 2)]).unwrap();
        assert_eq!(np.chain(), pts(&[(0, 2), (2, 2), (4, 0)]).as_slice());
        assert!(np.integer_points().contains(&LatticePoint::new(3, 1)));
    }

    fn e1_symbol() -> PolyTable {
        let one = Complex64::new(1.0, 0.0);
        let mut terms = radial_monomials(2, 2, 0, one);
        terms.extend(radial_monomials(2, 1, 2, one));
        PolyTable::new(terms)
    }

    #[test]
    fn principal_parts() {
        let p = e1_symbol();
        assert_eq!(p.principal_part(Slope::integer(1)).unwrap().terms.len(), p.terms.len());
        let pp = p.principal_part(Slope::integer(2)).unwrap();
        assert!(pp.terms.iter().all(|t| t.k == 2 && t.xi_degree() == 2));
        assert_eq!(pp.terms.len(), 2);
        let pinf = p.principal_part(Slope::Infinite).unwrap();
        assert_eq!(pinf, pp);

        let c = PolyTable::new(vec![Monomial { alpha: vec![0, 0], k: 0, coeff: Complex64::new(3.0, 0.0) }]);
        assert_eq!(c.principal_part(Slope::integer(5)).unwrap(), c);
        assert!(PolyTable::default().principal_part(Slope::integer(1)).is_err());
    }

    #[test]
    fn radial_expansion_coefficients() {
        let terms = radial_monomials(2, 2, 0, Complex64::new(1.0, 0.0));
        let mut got: Vec<_> = terms.iter().map(|t| (t.alpha.clone(), t.coeff.re)).collect();
        got.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(got, vec![(vec![0, 4], 1.0), (vec![2, 2], 2.0), (vec![4, 0], 1.0)]);
        assert_eq!(radial_monomials(3, 1, 0, Complex64::new(1.0, 0.0)).len(), 3);
    }

    #[test]
    fn rational_text_roundtrip() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational(" 4 ").unwrap(), q(4, 1));
        assert!(parse_rational("1/0").is_err());
        let s: Slope = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(s, Slope::Infinite);
        assert_eq!(serde_json::to_string(&Slope::Finite(q(3, 2))).unwrap(), "\"3/2\"");
    }

    fn generator_set() -> impl Strategy<Value = Vec<(i64, i64)>> {
        // Including (x, 0) with x beyond every other abscissa keeps the last side non-vertical.
        (prop::collection::vec((0i64..8, 0i64..8), 1..6), 0i64..4).prop_map(|(mut v, extra)| {
            let reach = v.iter().map(|p| p.0).max().unwrap_or(0) + 1 + extra;
            v.push((reach, 0));
            v
        })
    }

    proptest! {
        #[test]
        fn hull_is_idempotent(gens in generator_set()) {
            let np = NewtonPolygon::from_pairs(&gens).unwrap();
            let again = NewtonPolygon::build(&np.integer_points()).unwrap();
            prop_assert_eq!(again.hull_vertices(), np.hull_vertices());
            prop_assert_eq!(again.sides(), np.sides());
        }

        #[test]
        fn support_function_matches_side_degrees(gens in generator_set()) {
            let np = NewtonPolygon::from_pairs(&gens).unwrap();
            let rs: Vec<Slope> = np.sides().iter().map(|s| s.r).collect();
            for w in rs.windows(2) {
                prop_assert!(w[0] > w[1]);
            }
            for side in np.sides() {
                prop_assert_eq!(np.r_degree(side.r), side.degree);
                if let Degree::Finite(d) = side.degree {
                    for p in np.integer_points() {
                        let r = line_slope(side.r);
                        prop_assert!(Rational::from_integer(p.i) + r * p.k <= d);
                    }
                }
            }
        }

        #[test]
        fn generators_lie_inside(gens in generator_set()) {
            let np = NewtonPolygon::from_pairs(&gens).unwrap();
            for &(i, k) in &gens {
                prop_assert!(np.contains(LatticePoint::new(i, k)));
            }
            prop_assert!(np.contains(LatticePoint::ORIGIN));
        }
    }
}
