//! Adaptive Gauss–Kronrod quadrature and the series-acceleration helpers
//! used for slowly decaying oscillatory tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

// 21-point Kronrod nodes (non-negative half) and weights, with the embedded
// 10-point Gauss weights on the odd-indexed nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// An integral value with an absolute error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, o: Estimate) {
        *self = *self + o;
    }
}

impl Estimate {
    pub fn scale(self, s: f64) -> Estimate {
        Estimate {
            value: self.value * s,
            error: self.error * s.abs(),
        }
    }
}

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One 21-point Gauss–Kronrod panel.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Estimate { value, error }
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.est.error == o.est.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.est
            .error
            .partial_cmp(&o.est.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive Gauss–Kronrod integration on `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the total error
/// is below `max(abs_tol, rel_tol·|I|)` or `max_panels` is reached. Never
/// fails; callers compare the returned error against their own tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Estimate {
    if a == b {
        return Estimate::default();
    }
    let first = gk21(f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total = first;
    heap.push(Panel { a, b, est: first });
    while heap.len() < max_panels {
        if total.error <= abs_tol.max(rel_tol * total.value.abs()) {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let l = gk21(f, worst.a, mid);
        let r = gk21(f, mid, worst.b);
        total.value += l.value + r.value - worst.est.value;
        total.error += l.error + r.error - worst.est.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: l,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: r,
        });
    }
    // resum to drop the drift of the running update
    let mut v = KahanSum::new();
    let mut e = 0.0;
    for p in heap.iter() {
        v.add(p.est.value);
        e += p.est.error;
    }
    Estimate {
        value: v.value(),
        error: e,
    }
}

/// Adaptive integration over consecutive breakpoints.
pub fn adaptive_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], abs_tol: f64) -> Estimate {
    let n = breaks.len().saturating_sub(1).max(1) as f64;
    let mut out = Estimate::default();
    for w in breaks.windows(2) {
        out += adaptive(f, w[0], w[1], abs_tol / n, 1e-13, 400);
    }
    out
}

/// `∫_0^∞ e^{-s u} q(u) du` for a `period`-periodic `q` and `s > 0`, summing
/// the geometric series over periods in closed form.
pub fn periodic_laplace<F: Fn(f64) -> f64>(
    q: &F,
    s: f64,
    period: f64,
    abs_tol: f64,
) -> Result<Estimate> {
    if !(s > 0.0) || !(period > 0.0) {
        return Err(Error::Quadrature(format!(
            "periodic Laplace integral needs s > 0, period > 0 (s={s}, period={period})"
        )));
    }
    let g = |u: f64| (-s * u).exp() * q(u);
    let one = adaptive(&g, 0.0, period, abs_tol * 0.1, 1e-14, 400);
    let denom = -(-s * period).exp_m1();
    Ok(one.scale(1.0 / denom))
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the accelerated limit and an error estimate taken from the
/// spread of the last two accelerated values.
pub fn wynn_epsilon(partial: &[f64]) -> Estimate {
    let n = partial.len();
    if n < 3 {
        let v = *partial.last().unwrap_or(&0.0);
        let e = if n == 2 {
            (partial[1] - partial[0]).abs()
        } else {
            f64::INFINITY
        };
        return Estimate { value: v, error: e };
    }
    // eps[k][j]: column k, row j
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial.to_vec();
    let mut estimates: Vec<f64> = vec![*partial.last().unwrap()];
    let mut col = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            let p = if col == 0 { 0.0 } else { prev[j + 1] };
            if d == 0.0 || !d.is_finite() {
                next.push(f64::INFINITY);
            } else {
                next.push(p + 1.0 / d);
            }
        }
        col += 1;
        prev = cur;
        cur = next;
        if col.is_multiple_of(2) {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    estimates.push(v);
                } else {
                    break;
                }
            }
        }
    }
    let m = estimates.len();
    let value = estimates[m - 1];
    let error = if m >= 2 {
        (estimates[m - 1] - estimates[m - 2]).abs()
    } else {
        (partial[n - 1] - partial[n - 2]).abs()
    };
    Estimate { value, error }
}

/// `∫_a^∞ f(y) dy` for an integrand oscillating with the zeros
/// `phase + nπ` (e.g. `cos y · g(y)` with `phase = π/2`) and slowly decaying
/// envelope `g`. Integrates between consecutive zeros and accelerates the
/// resulting alternating series with Wynn's epsilon algorithm.
pub fn oscillatory_tail<F: Fn(f64) -> f64>(f: &F, a: f64, phase: f64, terms: usize) -> Estimate {
    let mut n0 = ((a - phase) / PI).floor() + 1.0;
    let mut z = phase + n0 * PI;
    if z <= a {
        n0 += 1.0;
        z = phase + n0 * PI;
    }
    let head = adaptive(f, a, z, 1e-14, 1e-14, 200);
    let mut partial = Vec::with_capacity(terms);
    let mut acc = head.value;
    let mut err = head.error;
    let mut lo = z;
    for i in 1..=terms {
        let hi = phase + (n0 + i as f64) * PI;
        let piece = adaptive(f, lo, hi, 1e-15, 1e-13, 100);
        acc += piece.value;
        err += piece.error;
        partial.push(acc);
        lo = hi;
    }
    let accel = wynn_epsilon(&partial);
    Estimate {
        value: accel.value,
        error: accel.error + err,
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let e = gk21(&|x: f64| x.powi(7) - 3.0 * x * x, 0.0, 2.0);
        assert_relative_eq!(e.value, 256.0 / 8.0 - 8.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_singular_endpoint() {
        let e = adaptive(&|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12, 1000);
        assert_relative_eq!(e.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn periodic_laplace_constant() {
        // ∫ e^{-u/2} du = 2
        let e = periodic_laplace(&|_u| 1.0, 0.5, 2.0 * PI, 1e-13).unwrap();
        assert_relative_eq!(e.value, 2.0, epsilon = 1e-12);
        let e = periodic_laplace(&|u: f64| u.sin(), 1.0, 2.0 * PI, 1e-13).unwrap();
        assert_relative_eq!(e.value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let partial: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let e = wynn_epsilon(&partial);
        assert_relative_eq!(e.value, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn oscillatory_dirichlet_tail() {
        // ∫_1^∞ cos(y)/y dy = -Ci(1)
        let ci1 = 0.337_403_922_900_968_1;
        let e = oscillatory_tail(&|y: f64| y.cos() / y, 1.0, PI / 2.0, 40);
        assert_relative_eq!(e.value, -ci1, epsilon = 1e-10);
        // ∫_0^∞ sin(y)/y^{1/2} dy = sqrt(π/2)
        let e = oscillatory_tail(
            &|y: f64| if y == 0.0 { 0.0 } else { y.sin() / y.sqrt() },
            0.0,
            0.0,
            40,
        );
        assert_relative_eq!(e.value, (PI / 2.0).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-17);
        }
        assert_relative_eq!(k.value(), 1.0 + 1e-14, epsilon = 1e-18);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(s, 2.0 / 11.0, epsilon = 1e-14);
    }
}
