//! Fixed-order Gauss–Legendre rules and an adaptive Gauss–Kronrod integrator.

use std::f64::consts::PI;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Tricomi's initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with this rule mapped onto `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = KahanSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.total()
    }

    /// Composite rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut acc = KahanSum::default();
        for p in 0..panels {
            let lo = a + width * p as f64;
            let hi = if p + 1 == panels { b } else { lo + width };
            acc.add(self.integrate(lo, hi, &mut f));
        }
        acc.total()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        // Neumaier's variant: robust when |x| > |sum|.
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let dx = half * GK_XK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += GK_WK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive 15-point Gauss–Kronrod on `[a, b]` with optional interior
/// breakpoints. Returns `(integral, error estimate)`.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> (f64, f64) {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|p| *p > a && *p < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut intervals: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (worst, _) =
            intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("at least one interval");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    let total = intervals.iter().map(|t| t.2).collect::<KahanSum>().total();
    let err = intervals.iter().map(|t| t.3).sum();
    (total, err)
}
