//! Quadrature: globally adaptive Gauss–Kronrod (7/15) and alternating panel
//! sums for oscillatory integrands.

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
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 application: (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection driven by the largest local error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    while err > tol.abs.max(tol.rel * total.abs()) {
        if count >= tol.max_intervals {
            if err <= 1e3 * tol.abs.max(tol.rel * total.abs()) {
                break;
            }
            return Err(Error::numeric(
                "adaptive quadrature did not converge",
                &[("a", a), ("b", b), ("value", total), ("error", err)],
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval exhausted at machine resolution
            heap.push(Piece {
                error: 0.0,
                ..worst
            });
            err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
        count += 1;
        if !total.is_finite() {
            return Err(Error::numeric(
                "non-finite integrand",
                &[("a", a), ("b", b)],
            ));
        }
    }
    // re-sum to shed accumulated update error
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

/// Integrate over consecutive breakpoints, summing the pieces.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    let mut value = 0.0;
    let mut error = 0.0;
    for w in breaks.windows(2) {
        let e = integrate(&f, w[0], w[1], tol)?;
        value += e.value;
        error += e.error;
    }
    Ok(Estimate { value, error })
}

/// Limit of a sequence of partial sums of an alternating series by repeated
/// pairwise averaging (the Euler transform in its partial-sum form).
pub fn averaged_limit(partials: &[f64]) -> f64 {
    let mut row = partials.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

/// Sum of panel integrals for an integrand whose panels alternate in sign.
///
/// `panel(k)` returns the k-th panel `[a_k, a_{k+1}]`; panels starting at or
/// beyond `cutoff` are dropped (the integrand is negligible there). Once the
/// panel count exceeds `warmup` the limit is also estimated by averaging
/// the last `window` partial sums, and the sum stops when two consecutive
/// estimates agree to `abs_tol`.
pub struct PanelSum {
    pub warmup: usize,
    pub window: usize,
    pub max_panels: usize,
}

impl Default for PanelSum {
    fn default() -> Self {
        PanelSum {
            warmup: 6,
            window: 16,
            max_panels: 2_000_000,
        }
    }
}

impl PanelSum {
    pub fn run<F, P>(&self, f: F, panel: P, cutoff: f64, abs_tol: f64, tol: Tolerance) -> Result<f64>
    where
        F: Fn(f64) -> f64,
        P: Fn(usize) -> (f64, f64),
    {
        let mut partials: Vec<f64> = Vec::new();
        let mut sum = 0.0;
        let mut last_estimate: Option<f64> = None;
        let mut agree = 0;
        for k in 0..self.max_panels {
            let (a, b) = panel(k);
            if a >= cutoff {
                return Ok(sum);
            }
            let b = b.min(cutoff);
            sum += integrate(&f, a, b, tol)?.value;
            partials.push(sum);
            if partials.len() > self.warmup + self.window {
                let tail = &partials[partials.len() - self.window..];
                let est = averaged_limit(tail);
                if let Some(prev) = last_estimate {
                    if (est - prev).abs() <= abs_tol {
                        agree += 1;
                        if agree >= 2 {
                            return Ok(est);
                        }
                    } else {
                        agree = 0;
                    }
                }
                last_estimate = Some(est);
            }
        }
        Err(Error::numeric(
            "oscillatory panel sum did not converge",
            &[("panels", self.max_panels as f64), ("partial", sum)],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, Tolerance::new(1e-14, 1e-14)).unwrap();
        assert!((e.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let e = integrate(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn alternating_series_limit() {
        // 1 - 1/2 + 1/3 - ... = ln 2
        let partials: Vec<f64> = (1..=20)
            .scan(0.0, |s, k| {
                *s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                Some(*s)
            })
            .collect();
        assert!((averaged_limit(&partials) - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn damped_cosine_panels() {
        // ∫_0^∞ cos(ξ r) e^{-t ξ} dξ = t / (t² + r²)
        let (t, r) = (1e-3, 10.0);
        let v = PanelSum::default()
            .run(
                |x| (x * r).cos() * (-t * x).exp(),
                |k| {
                    let h = PI / r;
                    if k == 0 {
                        (0.0, 0.5 * h)
                    } else {
                        ((k as f64 - 0.5) * h, (k as f64 + 0.5) * h)
                    }
                },
                46.0 / t,
                1e-16,
                Tolerance::new(1e-17, 1e-13),
            )
            .unwrap();
        let exact = t / (t * t + r * r);
        assert!((v / exact - 1.0).abs() < 1e-8, "{v} vs {exact}");
    }
}
