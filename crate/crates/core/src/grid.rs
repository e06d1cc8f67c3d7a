//! Grid construction and small regression helpers shared by the sweeps.

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Least-squares slope of y against x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Least-squares fit y ≈ c + b1 x1 + b2 x2; returns (b1, b2).
///
/// Falls back to single-variable slopes when the design is degenerate.
pub fn slopes2(x1: &[f64], x2: &[f64], y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let m = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (m1, m2, my) = (m(x1), m(x2), m(y));
    let mut s11 = 0.0;
    let mut s22 = 0.0;
    let mut s12 = 0.0;
    let mut s1y = 0.0;
    let mut s2y = 0.0;
    for i in 0..y.len() {
        let (a, b, c) = (x1[i] - m1, x2[i] - m2, y[i] - my);
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
        s1y += a * c;
        s2y += b * c;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-12 * (s11 * s22).max(f64::MIN_POSITIVE) {
        let b1 = if s11 > 0.0 { s1y / s11 } else { 0.0 };
        let b2 = if s22 > 0.0 { s2y / s22 } else { 0.0 };
        return (b1, b2);
    }
    ((s22 * s1y - s12 * s2y) / det, (s11 * s2y - s12 * s1y) / det)
}

pub fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_endpoints() {
        let g = logspace(1e-3, 1.0, 4);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[3], 1.0);
        assert!((g[1] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn two_variable_fit_recovers_plane() {
        let x1 = [0.0, 1.0, 2.0, 0.0, 1.0, 2.0];
        let x2 = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 3.0 + 0.5 * a - 2.0 * b).collect();
        let (b1, b2) = slopes2(&x1, &x2, &y);
        assert!((b1 - 0.5).abs() < 1e-12 && (b2 + 2.0).abs() < 1e-12);
    }
}
