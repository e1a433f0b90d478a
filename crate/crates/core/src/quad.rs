//! Adaptive 15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK[..7].iter().zip(WGK[..7].iter()).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]` after splitting at `breaks`, bisecting the
/// worst panel until the summed error estimate drops below `rel_tol·|I|`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    let mut nodes: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    nodes.push(a);
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut heap: BinaryHeap<Panel> = nodes.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if err <= rel_tol * total.abs() || err == 0.0 {
            return Ok(QuadResult { value: total, abs_error: err, panels: heap.len() });
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence after {max_panels} panels (estimate {total:e} ± {err:e})"
            )));
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
    }
}
