//! One-dimensional quadrature: Gauss–Legendre rules, composite panels and an
//! adaptive Gauss–Kronrod (7/15) driver with caller-defined payloads.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule computed by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule: split [a, b] into panels no wider than `max_width`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        max_width: f64,
        mut f: F,
    ) -> f64 {
        if b <= a {
            return 0.0;
        }
        let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Nodes and weights of the composite rule mapped onto [a, b].
    pub fn composite_points(&self, a: f64, b: f64, max_width: f64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        if b <= a {
            return (xs, ws);
        }
        let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

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
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The fifteen Kronrod nodes on [a, b] with Kronrod weights and the embedded
/// seven-point Gauss weights (zero at nodes the Gauss rule does not use).
pub fn gk15_rule(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for j in 0..7 {
        let g = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        out[2 * j] = (mid - half * XGK[j], half * WGK[j], half * g);
        out[2 * j + 1] = (mid + half * XGK[j], half * WGK[j], half * g);
    }
    out[14] = (mid, half * WGK[7], half * WG[3]);
    out
}

/// Result of integrating one interval: Kronrod and Gauss estimates plus an
/// arbitrary payload (for example per-sample contributions).
pub struct IntervalEstimate<T> {
    pub kronrod: f64,
    pub gauss: f64,
    pub payload: T,
}

/// Final partition of an adaptive run.
pub struct AdaptiveOutcome<T> {
    pub leaves: Vec<(f64, f64, IntervalEstimate<T>)>,
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances for [`adaptive_gk`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-6, rel: 1e-5, max_intervals: 64 }
    }
}

/// Globally adaptive bisection: repeatedly split the interval with the
/// largest |Kronrod − Gauss| until the summed error meets the tolerance.
pub fn adaptive_gk<T, F>(breakpoints: &[f64], tol: Tolerance, mut eval: F) -> Result<AdaptiveOutcome<T>>
where
    F: FnMut(f64, f64) -> Result<IntervalEstimate<T>>,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidInput("adaptive quadrature needs at least two breakpoints".into()));
    }
    let mut leaves = Vec::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        let est = eval(w[0], w[1])?;
        evaluations += 15;
        leaves.push((w[0], w[1], est));
    }
    loop {
        let value: f64 = leaves.iter().map(|l| l.2.kronrod).sum();
        let error: f64 = leaves.iter().map(|l| (l.2.kronrod - l.2.gauss).abs()).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || leaves.len() >= tol.max_intervals {
            return Ok(AdaptiveOutcome { leaves, value, error, evaluations });
        }
        let worst = leaves
            .iter()
            .enumerate()
            .max_by(|a, b| {
                let ea = (a.1 .2.kronrod - a.1 .2.gauss).abs();
                let eb = (b.1 .2.kronrod - b.1 .2.gauss).abs();
                ea.total_cmp(&eb)
            })
            .map(|(i, _)| i)
            .expect("non-empty leaf set");
        let (a, b, _) = leaves.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let left = eval(a, mid)?;
        let right = eval(mid, b)?;
        evaluations += 30;
        leaves.push((a, mid, left));
        leaves.push((mid, b, right));
        leaves.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
}

/// Scalar convenience wrapper around [`adaptive_gk`].
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: Tolerance, mut f: F) -> Result<(f64, f64)> {
    let out = adaptive_gk(&[a, b], tol, |lo, hi| {
        let mut k = 0.0;
        let mut g = 0.0;
        for (x, wk, wg) in gk15_rule(lo, hi) {
            let v = f(x);
            k += wk * v;
            g += wg * v;
        }
        Ok(IntervalEstimate { kronrod: k, gauss: g, payload: () })
    })?;
    Ok((out.value, out.error))
}
