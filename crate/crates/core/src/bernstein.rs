//! Laplace exponents of subordinators (Bernstein functions).
//!
//! A [`LaplaceExponentSpec`] is either one of the catalog families with
//! closed-form derivatives or a user table interpolated in log–log
//! coordinates. Besides the exponent `φ` itself the module provides
//! `H(λ) = φ(λ) − λφ′(λ)`, the inverse `φ⁻¹`, empirical lower/upper scaling
//! indices and comparability diagnostics between `φ`, `H`, `λφ′` and
//! `λ²(−φ″)`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::quad::{integrate, Tolerance};
use crate::special::gamma;

/// Gregory coefficients: λ/ln(1+λ) = Σ G_n λⁿ.
const GREGORY: [f64; 14] = [
    1.0,
    0.5,
    -1.0 / 12.0,
    1.0 / 24.0,
    -19.0 / 720.0,
    3.0 / 160.0,
    -863.0 / 60480.0,
    275.0 / 24192.0,
    -33953.0 / 3628800.0,
    8183.0 / 1036800.0,
    -3250433.0 / 479001600.0,
    4671.0 / 788480.0,
    -13695779093.0 / 2615348736000.0,
    2224234463.0 / 475517952000.0,
];

const CONJ_GAMMA_SERIES_BELOW: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// φ(λ) = λ^{α/2}, α ∈ (0, 2).
    Stable { alpha: f64 },
    /// φ(λ) = log(1 + λ^{β/2}), β ∈ (0, 2].
    GeometricStable { beta: f64 },
    /// φ(λ) = λ / log(1 + λ^{β/2}), β ∈ (0, 2).
    ConjugateGeometric { beta: f64 },
    /// φ(λ) = λ / log(1 + λ) − 1.
    ConjugateGamma,
    /// φ(λ) = bλ, the drift taken from the spec.
    PureDrift,
    UserTable(Table),
}

/// Strictly increasing, concave table of (λ, φ(λ)) pairs, interpolated by a
/// natural cubic spline in (ln λ, ln φ).
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    lambda: Vec<f64>,
    phi: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

/// Scaling thresholds λ_L, λ_U beyond which the lower/upper scaling
/// conditions hold for H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub lambda_l: f64,
    pub lambda_u: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceExponentSpec {
    pub family: Family,
    pub drift_b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinEval {
    pub lambda: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub phi_second: f64,
    pub h: f64,
}

impl BernsteinEval {
    /// Violations of the structural inequalities, as readable strings.
    pub fn invariant_violations(&self, rel_tol: f64) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.phi > 0.0) {
            v.push(format!("phi={} not positive", self.phi));
        }
        if self.phi_prime < 0.0 {
            v.push(format!("phi'={} negative", self.phi_prime));
        }
        if self.phi_second > 0.0 {
            v.push(format!("phi''={} positive", self.phi_second));
        }
        let slack = rel_tol * self.phi;
        if self.h < -slack || self.h > self.phi + slack {
            v.push(format!("H={} outside [0, phi={}]", self.h, self.phi));
        }
        let half_second = 0.5 * self.lambda * self.lambda * (-self.phi_second);
        if half_second > self.h * (1.0 + rel_tol) + slack * 1e-6 {
            v.push(format!("H={} below λ²(−φ″)/2={}", self.h, half_second));
        }
        v
    }
}

impl Table {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Config("user_table needs at least 3 points".into()));
        }
        for w in points.windows(2) {
            let ([l0, p0], [l1, p1]) = (w[0], w[1]);
            if !(l0 > 0.0 && p0 > 0.0) {
                return Err(Error::Config("user_table entries must be positive".into()));
            }
            if !(l1 > l0) {
                return Err(Error::Config(format!(
                    "user_table lambda not strictly increasing at {l0} -> {l1}"
                )));
            }
            if !(p1 > p0) {
                return Err(Error::Config(format!(
                    "user_table phi not strictly increasing at lambda={l1}"
                )));
            }
        }
        let slopes: Vec<f64> = points
            .windows(2)
            .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
            .collect();
        for (i, s) in slopes.windows(2).enumerate() {
            if s[1] > s[0] * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "user_table not concave near lambda={}",
                    points[i + 1][0]
                )));
            }
        }
        let lambda: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let phi: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let x: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
        let y: Vec<f64> = phi.iter().map(|p| p.ln()).collect();
        let m = natural_spline_moments(&x, &y);
        Ok(Table {
            lambda,
            phi,
            x,
            y,
            m,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.lambda[0], *self.lambda.last().unwrap())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.phi[0], *self.phi.last().unwrap())
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.lambda.iter().zip(&self.phi).map(|(l, p)| [*l, *p]).collect()
    }

    /// Interpolated φ; linear continuation in log–log space past the ends.
    fn interpolate(&self, lambda: f64) -> f64 {
        let u = lambda.ln();
        let n = self.x.len();
        if u <= self.x[0] {
            let s = self.end_slope(0);
            return (self.y[0] + s * (u - self.x[0])).exp();
        }
        if u >= self.x[n - 1] {
            let s = self.end_slope(n - 2);
            return (self.y[n - 1] + s * (u - self.x[n - 1])).exp();
        }
        let i = self.x.partition_point(|&xi| xi <= u).min(n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - u) / h;
        let b = (u - self.x[i]) / h;
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0;
        v.exp()
    }

    fn end_slope(&self, i: usize) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let d = (self.y[i + 1] - self.y[i]) / h;
        if i == 0 {
            d - h * (2.0 * self.m[0] + self.m[1]) / 6.0
        } else {
            d + h * (self.m[i] + 2.0 * self.m[i + 1]) / 6.0
        }
    }
}

fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // tridiagonal system for interior second derivatives (Thomas algorithm)
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag[j] = 2.0 * (h0 + h1);
        upper[j] = h1;
        rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for j in 1..k {
        let lower = x[j + 1] - x[j];
        let w = lower / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    let mut sol = vec![0.0; k];
    sol[k - 1] = rhs[k - 1] / diag[k - 1];
    for j in (0..k - 1).rev() {
        sol[j] = (rhs[j] - upper[j] * sol[j + 1]) / diag[j];
    }
    m[1..n - 1].copy_from_slice(&sol);
    m
}

/// Central-difference derivatives with one Richardson step.
pub fn richardson_derivatives<F: Fn(f64) -> f64>(f: F, lambda: f64) -> (f64, f64) {
    let d1 = |h: f64| (f(lambda + h) - f(lambda - h)) / (2.0 * h);
    let h1 = lambda * 1e-4;
    let first = (4.0 * d1(0.5 * h1) - d1(h1)) / 3.0;
    let f0 = f(lambda);
    let d2 = |h: f64| (f(lambda + h) - 2.0 * f0 + f(lambda - h)) / (h * h);
    // wider step for the second difference, where rounding error scales as 1/h²
    let h2 = lambda * 1e-3;
    let second = (4.0 * d2(0.5 * h2) - d2(h2)) / 3.0;
    (first, second)
}

impl LaplaceExponentSpec {
    pub fn new(family: Family, drift_b: f64) -> Result<Self> {
        let spec = LaplaceExponentSpec { family, drift_b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(Family::Stable { alpha }, 0.0)
    }

    pub fn geometric_stable(beta: f64) -> Result<Self> {
        Self::new(Family::GeometricStable { beta }, 0.0)
    }

    pub fn conjugate_geometric(beta: f64) -> Result<Self> {
        Self::new(Family::ConjugateGeometric { beta }, 0.0)
    }

    pub fn conjugate_gamma() -> Self {
        LaplaceExponentSpec {
            family: Family::ConjugateGamma,
            drift_b: 0.0,
        }
    }

    pub fn pure_drift(b: f64) -> Result<Self> {
        Self::new(Family::PureDrift, b)
    }

    pub fn user_table(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(Family::UserTable(Table::new(points)?), 0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.drift_b >= 0.0) || !self.drift_b.is_finite() {
            return Err(Error::Config(format!("drift_b={} must be >= 0", self.drift_b)));
        }
        match &self.family {
            Family::Stable { alpha } if !(*alpha > 0.0 && *alpha < 2.0) => {
                Err(Error::Config(format!("alpha out of (0,2): {alpha}")))
            }
            Family::GeometricStable { beta } if !(*beta > 0.0 && *beta <= 2.0) => {
                Err(Error::Config(format!("beta out of (0,2]: {beta}")))
            }
            Family::ConjugateGeometric { beta } if !(*beta > 0.0 && *beta < 2.0) => {
                Err(Error::Config(format!("beta out of (0,2): {beta}")))
            }
            Family::PureDrift if !(self.drift_b > 0.0) => {
                Err(Error::Config("pure_drift needs drift_b > 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Stable { alpha } => format!("stable(alpha={alpha})"),
            Family::GeometricStable { beta } => format!("geometric_stable(beta={beta})"),
            Family::ConjugateGeometric { beta } => format!("conjugate_geometric(beta={beta})"),
            Family::ConjugateGamma => "conjugate_gamma".into(),
            Family::PureDrift => format!("pure_drift(b={})", self.drift_b),
            Family::UserTable(t) => format!("user_table({} points)", t.lambda.len()),
        }
    }

    pub fn is_catalog(&self) -> bool {
        !matches!(self.family, Family::UserTable(_))
    }

    pub fn is_pure_drift(&self) -> bool {
        matches!(self.family, Family::PureDrift)
    }

    /// Zero drift, or a pure drift: the cases whose law is constructed.
    pub fn has_admissible_drift(&self) -> bool {
        self.drift_b == 0.0 || self.is_pure_drift()
    }

    /// Scaling thresholds of H for families known to satisfy both scaling
    /// conditions for H with upper index below 2.
    pub fn thresholds(&self) -> Option<Thresholds> {
        match self.family {
            Family::Stable { .. } | Family::ConjugateGeometric { .. } => Some(Thresholds {
                lambda_l: 0.0,
                lambda_u: 0.0,
            }),
            Family::ConjugateGamma => Some(Thresholds {
                lambda_l: 0.0,
                lambda_u: 2.0,
            }),
            _ => None,
        }
    }

    /// Whether φ itself satisfies the lower scaling condition (globally).
    pub fn phi_has_lower_scaling(&self) -> bool {
        !matches!(
            self.family,
            Family::GeometricStable { .. } | Family::UserTable(_)
        )
    }

    /// Closed-form Lévy tail μ(r, ∞), available for the stable family only.
    pub fn known_levy_tail(&self, r: f64) -> Option<f64> {
        match self.family {
            Family::Stable { alpha } if self.drift_b == 0.0 => {
                Some(stable_tail_constant(alpha) * r.powf(-0.5 * alpha))
            }
            _ => None,
        }
    }

    /// Upper end of the range of φ (∞ for every catalog family).
    pub fn phi_sup(&self) -> f64 {
        match &self.family {
            Family::UserTable(t) => t.range().1,
            _ => f64::INFINITY,
        }
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !(lambda > 0.0) || lambda.is_nan() {
            return Err(Error::Domain(format!("lambda={lambda} must be > 0")));
        }
        if let Family::UserTable(t) = &self.family {
            let (lo, hi) = t.span();
            if lambda < lo * (1.0 - 1e-12) || lambda > hi * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "lambda={lambda} outside table span [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// φ(λ) without derivative bookkeeping. Assumes λ > 0.
    pub fn phi_unchecked(&self, lambda: f64) -> f64 {
        let drift = self.drift_b * lambda;
        drift
            + match &self.family {
                Family::Stable { alpha } => lambda.powf(0.5 * alpha),
                Family::GeometricStable { beta } => lambda.powf(0.5 * beta).ln_1p(),
                Family::ConjugateGeometric { beta } => lambda / lambda.powf(0.5 * beta).ln_1p(),
                Family::ConjugateGamma => {
                    if lambda < CONJ_GAMMA_SERIES_BELOW {
                        conj_gamma_series(lambda).0
                    } else {
                        lambda / lambda.ln_1p() - 1.0
                    }
                }
                Family::PureDrift => 0.0,
                Family::UserTable(t) => t.interpolate(lambda),
            }
    }

    pub fn phi(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(self.phi_unchecked(lambda))
    }

    /// φ in double-double precision; `None` for tables.
    pub fn phi_dd(&self, lambda: Dd) -> Option<Dd> {
        let base = match &self.family {
            Family::Stable { alpha } => lambda.powf(0.5 * alpha),
            Family::GeometricStable { beta } => lambda.powf(0.5 * beta).ln_1p(),
            Family::ConjugateGeometric { beta } => lambda / lambda.powf(0.5 * beta).ln_1p(),
            Family::ConjugateGamma => lambda / lambda.ln_1p() - Dd::ONE,
            Family::PureDrift => Dd::ZERO,
            Family::UserTable(_) => return None,
        };
        Some(base + lambda.mul_f64(self.drift_b))
    }

    /// φ, φ′, φ″ and H at λ.
    pub fn eval(&self, lambda: f64) -> Result<BernsteinEval> {
        self.check_lambda(lambda)?;
        let (phi, d1, d2, h) = match &self.family {
            Family::Stable { alpha } => {
                let a = 0.5 * alpha;
                let p = lambda.powf(a);
                (p, a * p / lambda, a * (a - 1.0) * p / (lambda * lambda), (1.0 - a) * p)
            }
            Family::GeometricStable { beta } => {
                let b = 0.5 * beta;
                let u = lambda.powf(b);
                let p = u.ln_1p();
                let d1 = b * u / (lambda * (1.0 + u));
                let d2 = b * u * ((b - 1.0) - u) / (lambda * lambda * (1.0 + u) * (1.0 + u));
                let h = if u < 1e-3 {
                    // Σ (−1)^{n+1} uⁿ (1/n − b)
                    (1..=8)
                        .map(|n| {
                            let s = if n % 2 == 1 { 1.0 } else { -1.0 };
                            s * u.powi(n) * (1.0 / n as f64 - b)
                        })
                        .sum()
                } else {
                    p - b * u / (1.0 + u)
                };
                (p, d1, d2, h)
            }
            Family::ConjugateGeometric { beta } => {
                let b = 0.5 * beta;
                let u = lambda.powf(b);
                let l = u.ln_1p();
                let m = b * u / (1.0 + u);
                let lm1 = b * b * u / ((1.0 + u) * (1.0 + u));
                let p = lambda / l;
                let d1 = (l - m) / (l * l);
                let d2 = (-m * l - lm1 * l + 2.0 * m * m) / (lambda * l * l * l);
                (p, d1, d2, lambda * m / (l * l))
            }
            Family::ConjugateGamma => {
                if lambda < CONJ_GAMMA_SERIES_BELOW {
                    let (p, d1, d2, h) = conj_gamma_series(lambda);
                    (p, d1, d2, h)
                } else {
                    let l = lambda.ln_1p();
                    let q = 1.0 + lambda;
                    let p = lambda / l - 1.0;
                    let d1 = 1.0 / l - lambda / (q * l * l);
                    let d2 = (2.0 * lambda - (2.0 + lambda) * l) / (q * q * l * l * l);
                    let h = lambda * lambda / (q * l * l) - 1.0;
                    (p, d1, d2, h)
                }
            }
            Family::PureDrift => (0.0, 0.0, 0.0, 0.0),
            Family::UserTable(t) => {
                let p = t.interpolate(lambda);
                let (d1, d2) = richardson_derivatives(|x| t.interpolate(x), lambda);
                (p, d1, d2, p - lambda * d1)
            }
        };
        Ok(BernsteinEval {
            lambda,
            phi: phi + self.drift_b * lambda,
            phi_prime: d1 + self.drift_b,
            phi_second: d2,
            h,
        })
    }

    pub fn h(&self, lambda: f64) -> Result<f64> {
        Ok(self.eval(lambda)?.h)
    }

    /// φ⁻¹(y): closed forms where available, otherwise bracketing by
    /// doubling/halving from λ = 1 followed by bisection.
    pub fn phi_inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Domain(format!("phi_inverse: y={y} outside the range of phi")));
        }
        if self.drift_b == 0.0 {
            match self.family {
                Family::Stable { alpha } => return Ok(y.powf(2.0 / alpha)),
                Family::GeometricStable { beta } => {
                    let v = y.exp_m1().powf(2.0 / beta);
                    return if v.is_finite() && v > 0.0 {
                        Ok(v)
                    } else {
                        Err(Error::Domain(format!("phi_inverse: y={y} overflows")))
                    };
                }
                _ => {}
            }
        }
        if self.is_pure_drift() {
            return Ok(y / self.drift_b);
        }
        let (mut lo, mut hi) = match &self.family {
            Family::UserTable(t) => {
                let (plo, phi_hi) = t.range();
                if y < plo * (1.0 - 1e-12) || y > phi_hi * (1.0 + 1e-12) {
                    return Err(Error::Domain(format!(
                        "phi_inverse: y={y} outside table range [{plo}, {phi_hi}]"
                    )));
                }
                t.span()
            }
            _ => {
                let mut lo = 1.0;
                let mut hi = 1.0;
                while self.phi_unchecked(lo) > y {
                    lo *= 0.5;
                    if lo < 1e-300 {
                        return Err(Error::Domain(format!("phi_inverse: y={y} below range")));
                    }
                }
                while self.phi_unchecked(hi) < y {
                    hi *= 2.0;
                    if !hi.is_finite() || hi > 1e300 {
                        return Err(Error::Domain(format!("phi_inverse: y={y} above range")));
                    }
                }
                (lo, hi)
            }
        };
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.phi_unchecked(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (elo, ehi) = (
            (self.phi_unchecked(lo) - y).abs(),
            (self.phi_unchecked(hi) - y).abs(),
        );
        Ok(if elo <= ehi { lo } else { hi })
    }

    fn scaling_target(&self, target: ScalingTarget, lambda: f64) -> Result<f64> {
        match target {
            ScalingTarget::Phi => self.phi(lambda),
            ScalingTarget::H => self.h(lambda),
        }
    }

    /// Empirical lower and upper scaling indices of φ or H on a window.
    ///
    /// For every dyadic dilation x ∈ {2, …, 2¹⁰} the mean exponent
    /// ln(f(λx)/f(λ))/ln x over the geometric λ-grid is formed; γ and δ are
    /// the smallest and largest of these. The prefactors C_L, C_U are the
    /// grid extremes of f(λx)/(f(λ)x^γ) and f(λx)/(f(λ)x^δ).
    pub fn scaling_indices(&self, target: ScalingTarget, window: (f64, f64)) -> Result<ScalingReport> {
        let (lmin, lmax) = window;
        if !(lmin > 0.0) || !(lmax / lmin >= 1e3 * (1.0 - 1e-12)) {
            return Err(Error::Config(format!(
                "scaling window ({lmin}, {lmax}) must be positive with ratio >= 1e3"
            )));
        }
        let grid = logspace(lmin, lmax, 200);
        let values = grid
            .iter()
            .map(|&l| self.scaling_target(target, l))
            .collect::<Result<Vec<f64>>>()?;
        for (w, l) in values.windows(2).zip(&grid) {
            if !(w[0] > 0.0) || !(w[1] > w[0]) {
                return Err(Error::Diagnostic(format!(
                    "{:?} not positive and increasing near lambda={l}",
                    target
                )));
            }
        }
        let mut per_x = Vec::new();
        let mut pairs = Vec::new();
        for k in 1..=10 {
            let x = 2f64.powi(k);
            let lx = x.ln();
            let mut acc = 0.0;
            let mut n = 0;
            for (&l, &fl) in grid.iter().zip(&values) {
                if l * x > lmax * (1.0 + 1e-12) {
                    break;
                }
                let ratio = self.scaling_target(target, l * x)? / fl;
                acc += ratio.ln() / lx;
                n += 1;
                pairs.push((x, ratio));
            }
            if n > 0 {
                per_x.push(acc / n as f64);
            }
        }
        let gamma = per_x.iter().cloned().fold(f64::INFINITY, f64::min);
        let delta = per_x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let c_l = pairs
            .iter()
            .map(|(x, r)| r / x.powf(gamma))
            .fold(f64::INFINITY, f64::min);
        let c_u = pairs
            .iter()
            .map(|(x, r)| r / x.powf(delta))
            .fold(f64::NEG_INFINITY, f64::max);
        let sxx: f64 = pairs.iter().map(|(x, _)| x.ln().powi(2)).sum();
        let sxy: f64 = pairs.iter().map(|(x, r)| x.ln() * r.ln()).sum();
        let pooled = sxy / sxx;
        let residual = pairs
            .iter()
            .map(|(x, r)| (r.ln() - pooled * x.ln()).abs())
            .fold(0.0, f64::max);
        let (lambda_l, lambda_u) = match self.thresholds() {
            Some(t) => (t.lambda_l, t.lambda_u),
            None if matches!(self.family, Family::Stable { .. } | Family::PureDrift) => (0.0, 0.0),
            None => (lmin, lmin),
        };
        Ok(ScalingReport {
            target,
            gamma,
            c_l,
            lambda_l,
            delta,
            c_u,
            lambda_u,
            window,
            residual,
        })
    }

    /// Extremes of H/φ, λφ′/φ and H/(λ²(−φ″)) over a geometric grid.
    pub fn comparability(&self, window: (f64, f64)) -> Result<ComparabilityReport> {
        let grid = logspace(window.0, window.1, 256);
        let mut h_phi = Vec::with_capacity(grid.len());
        let mut dphi_phi = Vec::with_capacity(grid.len());
        let mut h_second = Vec::with_capacity(grid.len());
        for &l in &grid {
            let e = self.eval(l)?;
            h_phi.push(e.h / e.phi);
            dphi_phi.push(l * e.phi_prime / e.phi);
            if e.phi_second < 0.0 {
                h_second.push(e.h / (l * l * (-e.phi_second)));
            }
        }
        let log_l: Vec<f64> = grid.iter().map(|l| l.ln()).collect();
        let log_hphi: Vec<f64> = h_phi.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        Ok(ComparabilityReport {
            window,
            h_over_phi: RatioRange::of(&h_phi),
            lambda_phi_prime_over_phi: RatioRange::of(&dphi_phi),
            h_over_lambda2_second: if h_second.len() == grid.len() {
                Some(RatioRange::of(&h_second))
            } else {
                None
            },
            h_over_phi_trend: crate::grid::slope(&log_l, &log_hphi),
        })
    }

    /// The constant M of the lower Lévy-tail bound, obtained from the upper
    /// scaling constants of H on `window`: the largest M ≤ 1 with
    /// 2e·C_U·M^{2−δ}/(2−δ) ≤ 1/2.
    pub fn fit_levy_m(&self, window: (f64, f64)) -> Result<Option<f64>> {
        let rep = self.scaling_indices(ScalingTarget::H, window)?;
        if rep.delta >= 2.0 {
            return Ok(None);
        }
        let k = 2.0 - rep.delta;
        Ok(Some((k / (4.0 * E * rep.c_u)).powf(1.0 / k).min(1.0)))
    }

    /// Default window for fitting M: six decades above λ_U.
    pub fn levy_m_window(&self) -> (f64, f64) {
        let lu = self.thresholds().map_or(0.0, |t| t.lambda_u);
        if lu > 0.0 {
            (lu, lu * 1e6)
        } else {
            (1e-3, 1e5)
        }
    }

    /// H-based bounds on μ(r, ∞), with the closed tail when known.
    pub fn levy_tail(&self, r: f64) -> Result<LevyTail> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("levy_tail: r={r} must be > 0")));
        }
        let h = self.h(1.0 / r)?;
        let m = match self.family {
            Family::PureDrift => None,
            _ => self.fit_levy_m(self.levy_m_window())?,
        };
        let lu = self.thresholds().map_or(0.0, |t| t.lambda_u);
        let lower_valid = m.is_some_and(|m| lu == 0.0 || r < m / lu);
        Ok(LevyTail {
            r,
            mu_tail: self.known_levy_tail(r),
            upper_bound: 2.0 * E * h,
            lower_bound: m.filter(|_| lower_valid).map(|m| 0.5 * m * m * h),
            m,
        })
    }
}

/// φ, φ′, φ″, H of the conjugate gamma exponent from the Gregory series.
fn conj_gamma_series(lambda: f64) -> (f64, f64, f64, f64) {
    let mut p = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut h = 0.0;
    for n in (1..GREGORY.len()).rev() {
        let c = GREGORY[n];
        let nf = n as f64;
        p += c * lambda.powi(n as i32);
        d1 += c * nf * lambda.powi(n as i32 - 1);
        if n >= 2 {
            d2 += c * nf * (nf - 1.0) * lambda.powi(n as i32 - 2);
            h += c * (1.0 - nf) * lambda.powi(n as i32);
        }
    }
    (p, d1, d2, h)
}

/// μ(r, ∞) = c r^{−α/2} for φ(λ) = λ^{α/2}, with c = 1/Γ(1 − α/2).
pub fn stable_tail_constant(alpha: f64) -> f64 {
    1.0 / gamma(1.0 - 0.5 * alpha)
}

/// Both sides of μ(r,∞) + r⁻²∫_{(0,r]} y²μ(dy) = 2r⁻²∫₀ʳ yμ(y,∞)dy for the
/// stable Lévy measure, each side integrated numerically.
pub fn stable_tail_identity(alpha: f64, r: f64) -> Result<(f64, f64)> {
    let a = 0.5 * alpha;
    let c = stable_tail_constant(alpha);
    let tol = Tolerance::new(0.0, 1e-12);
    // substitute y = r·s^k to flatten the algebraic endpoint behaviour
    let k = 4.0;
    let density = |y: f64| a * c * y.powf(-a - 1.0);
    let second_moment = integrate(
        |s: f64| {
            let y = r * s.powf(k);
            y * y * density(y) * r * k * s.powf(k - 1.0)
        },
        0.0,
        1.0,
        tol,
    )?
    .value;
    let tail_moment = integrate(
        |s: f64| {
            let y = r * s.powf(k);
            y * c * y.powf(-a) * r * k * s.powf(k - 1.0)
        },
        0.0,
        1.0,
        tol,
    )?
    .value;
    let lhs = c * r.powf(-a) + second_moment / (r * r);
    let rhs = 2.0 * tail_moment / (r * r);
    Ok((lhs, rhs))
}

/// ∫₀ʳ yμ(y,∞)dy for the stable measure, by quadrature.
pub fn stable_tail_first_moment(alpha: f64, r: f64) -> Result<f64> {
    let a = 0.5 * alpha;
    let c = stable_tail_constant(alpha);
    let k = 4.0;
    Ok(integrate(
        |s: f64| {
            let y = r * s.powf(k);
            y * c * y.powf(-a) * r * k * s.powf(k - 1.0)
        },
        0.0,
        1.0,
        Tolerance::new(0.0, 1e-12),
    )?
    .value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingTarget {
    Phi,
    H,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub target: ScalingTarget,
    pub gamma: f64,
    #[serde(rename = "C_L")]
    pub c_l: f64,
    pub lambda_l: f64,
    pub delta: f64,
    #[serde(rename = "C_U")]
    pub c_u: f64,
    pub lambda_u: f64,
    pub window: (f64, f64),
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioRange {
    pub inf: f64,
    pub sup: f64,
}

impl RatioRange {
    fn of(v: &[f64]) -> Self {
        RatioRange {
            inf: v.iter().cloned().fold(f64::INFINITY, f64::min),
            sup: v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn spread(&self) -> f64 {
        self.sup / self.inf
    }

    /// Reporting cutoff only: spread at most 50.
    pub fn comparable(&self) -> bool {
        self.inf > 0.0 && self.spread() <= 50.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparabilityReport {
    pub window: (f64, f64),
    pub h_over_phi: RatioRange,
    pub lambda_phi_prime_over_phi: RatioRange,
    /// Absent when φ″ vanishes somewhere on the grid (pure drift).
    pub h_over_lambda2_second: Option<RatioRange>,
    /// Least-squares slope of ln(H/φ) against ln λ.
    pub h_over_phi_trend: f64,
}

/// Log-log drift of H/φ above which the ratio is treated as running off.
pub const TREND_CUTOFF: f64 = 0.02;

impl ComparabilityReport {
    /// H ≍ φ on the window: bounded spread and no systematic drift.
    pub fn h_phi_comparable(&self) -> bool {
        self.h_over_phi.comparable() && self.h_over_phi_trend.abs() <= TREND_CUTOFF
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevyTail {
    pub r: f64,
    pub mu_tail: Option<f64>,
    pub upper_bound: f64,
    /// (M²/2)·H(1/r); absent outside 0 < r < M/λ_U or when no M exists.
    pub lower_bound: Option<f64>,
    pub m: Option<f64>,
}

impl LevyTail {
    /// Whether the closed-form tail (if any) lies between the bounds.
    pub fn sandwich_holds(&self) -> bool {
        match self.mu_tail {
            None => true,
            Some(mu) => mu <= self.upper_bound && self.lower_bound.is_none_or(|lo| mu >= lo),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default)]
    drift_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
}

impl TryFrom<RawSpec> for LaplaceExponentSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("family {} requires {name}", raw.family)))
        };
        let forbid = |present: bool, name: &str| {
            if present {
                Err(Error::Config(format!("family {} does not take {name}", raw.family)))
            } else {
                Ok(())
            }
        };
        let family = match raw.family.as_str() {
            "stable" => {
                forbid(raw.beta.is_some(), "beta")?;
                Family::Stable {
                    alpha: need(raw.alpha, "alpha")?,
                }
            }
            "geometric_stable" => {
                forbid(raw.alpha.is_some(), "alpha")?;
                Family::GeometricStable {
                    beta: need(raw.beta, "beta")?,
                }
            }
            "conjugate_geometric" => {
                forbid(raw.alpha.is_some(), "alpha")?;
                Family::ConjugateGeometric {
                    beta: need(raw.beta, "beta")?,
                }
            }
            "conjugate_gamma" => {
                forbid(raw.alpha.is_some() || raw.beta.is_some(), "alpha/beta")?;
                Family::ConjugateGamma
            }
            "pure_drift" => Family::PureDrift,
            "user_table" => {
                let pts = raw
                    .points
                    .as_ref()
                    .ok_or_else(|| Error::Config("user_table requires points".into()))?;
                Family::UserTable(Table::new(pts)?)
            }
            other => return Err(Error::Config(format!("unknown family '{other}'"))),
        };
        if raw.points.is_some() && !matches!(family, Family::UserTable(_)) {
            return Err(Error::Config("points only apply to user_table".into()));
        }
        LaplaceExponentSpec::new(family, raw.drift_b)
    }
}

impl From<&LaplaceExponentSpec> for RawSpec {
    fn from(s: &LaplaceExponentSpec) -> Self {
        let mut raw = RawSpec {
            family: String::new(),
            alpha: None,
            beta: None,
            drift_b: s.drift_b,
            points: None,
        };
        raw.family = match &s.family {
            Family::Stable { alpha } => {
                raw.alpha = Some(*alpha);
                "stable"
            }
            Family::GeometricStable { beta } => {
                raw.beta = Some(*beta);
                "geometric_stable"
            }
            Family::ConjugateGeometric { beta } => {
                raw.beta = Some(*beta);
                "conjugate_geometric"
            }
            Family::ConjugateGamma => "conjugate_gamma",
            Family::PureDrift => "pure_drift",
            Family::UserTable(t) => {
                raw.points = Some(t.points());
                "user_table"
            }
        }
        .to_string();
        raw
    }
}

impl Serialize for LaplaceExponentSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaplaceExponentSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpec::deserialize(d)?;
        LaplaceExponentSpec::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl LaplaceExponentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<LaplaceExponentSpec> {
        vec![
            LaplaceExponentSpec::stable(0.6).unwrap(),
            LaplaceExponentSpec::stable(1.0).unwrap(),
            LaplaceExponentSpec::stable(1.7).unwrap(),
            LaplaceExponentSpec::geometric_stable(1.0).unwrap(),
            LaplaceExponentSpec::geometric_stable(2.0).unwrap(),
            LaplaceExponentSpec::conjugate_geometric(1.0).unwrap(),
            LaplaceExponentSpec::conjugate_geometric(0.5).unwrap(),
            LaplaceExponentSpec::conjugate_gamma(),
        ]
    }

    #[test]
    fn stable_values() {
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        let e = s.eval(4.0).unwrap();
        assert!((e.phi - 2.0).abs() < 1e-15);
        assert!((e.h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_stable_at_e_minus_one() {
        let s = LaplaceExponentSpec::geometric_stable(2.0).unwrap();
        assert!((s.phi(E - 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_gamma_small_lambda_asymptotics() {
        let s = LaplaceExponentSpec::conjugate_gamma();
        let e = s.eval(1e-6).unwrap();
        assert!((e.phi / 1e-6 / 0.5 - 1.0).abs() < 1e-3);
        let e = s.eval(1e-3).unwrap();
        assert!((e.h / 1e-6 * 12.0 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn conjugate_gamma_branches_join() {
        let s = LaplaceExponentSpec::conjugate_gamma();
        let below = s.eval(CONJ_GAMMA_SERIES_BELOW * (1.0 - 1e-12)).unwrap();
        let above = s.eval(CONJ_GAMMA_SERIES_BELOW).unwrap();
        for (a, b) in [
            (below.phi, above.phi),
            (below.phi_prime, above.phi_prime),
            (below.phi_second, above.phi_second),
            (below.h, above.h),
        ] {
            assert!((a / b - 1.0).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn domain_and_config_errors() {
        assert!(matches!(LaplaceExponentSpec::stable(2.5), Err(Error::Config(_))));
        assert!(matches!(
            LaplaceExponentSpec::conjugate_geometric(2.0),
            Err(Error::Config(_))
        ));
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        assert!(matches!(s.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(s.eval(-1.0), Err(Error::Domain(_))));
        let t = LaplaceExponentSpec::user_table(&[[1.0, 1.0], [2.0, 1.5], [4.0, 2.0]]).unwrap();
        assert!(matches!(t.eval(8.0), Err(Error::Domain(_))));
        assert!(matches!(t.phi_inverse(3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn user_table_validation() {
        assert!(LaplaceExponentSpec::user_table(&[[1.0, 1.0], [2.0, 0.9], [3.0, 2.0]]).is_err());
        // convex data is rejected
        assert!(LaplaceExponentSpec::user_table(&[[1.0, 1.0], [2.0, 2.0], [3.0, 4.0]]).is_err());
        assert!(LaplaceExponentSpec::user_table(&[[2.0, 1.0], [1.0, 2.0], [3.0, 4.0]]).is_err());
    }

    #[test]
    fn user_table_reproduces_sampled_stable() {
        let src = LaplaceExponentSpec::stable(1.2).unwrap();
        let pts: Vec<[f64; 2]> = logspace(1e-2, 1e4, 61)
            .into_iter()
            .map(|l| [l, src.phi(l).unwrap()])
            .collect();
        let t = LaplaceExponentSpec::user_table(&pts).unwrap();
        for l in [0.05, 1.0, 37.0, 900.0] {
            let (a, b) = (t.eval(l).unwrap(), src.eval(l).unwrap());
            assert!((a.phi / b.phi - 1.0).abs() < 1e-10);
            assert!((a.phi_prime / b.phi_prime - 1.0).abs() < 1e-6);
            assert!((a.h / b.h - 1.0).abs() < 1e-5);
        }
        assert!((t.phi_inverse(3.0).unwrap() / src.phi_inverse(3.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn invariants_hold_across_catalog() {
        for s in catalog() {
            let mut prev = 0.0;
            for l in logspace(1e-8, 1e10, 300) {
                let e = s.eval(l).unwrap();
                let v = e.invariant_violations(1e-9);
                assert!(v.is_empty(), "{} at {l}: {v:?}", s.name());
                assert!(e.phi > prev);
                prev = e.phi;
            }
        }
    }

    #[test]
    fn doubling_bounds() {
        for s in catalog() {
            for l in logspace(1e-6, 1e8, 120) {
                let (p, h) = (s.phi(l).unwrap(), s.h(l).unwrap());
                for x in [2.0, 4.0, 8.0] {
                    assert!(s.phi(l * x).unwrap() <= x * p * (1.0 + 1e-12));
                    assert!(s.h(l * x).unwrap() <= x * x * h * (1.0 + 1e-9), "{} {l}", s.name());
                }
            }
        }
    }

    #[test]
    fn conjugate_gamma_doubling_is_sharp_at_zero() {
        let s = LaplaceExponentSpec::conjugate_gamma();
        let l = 1e-6;
        assert!(s.phi(2.0 * l).unwrap() / (2.0 * s.phi(l).unwrap()) > 0.99);
        assert!(s.h(2.0 * l).unwrap() / (4.0 * s.h(l).unwrap()) > 0.99);
    }

    #[test]
    fn finite_differences_match_closed_forms() {
        for s in catalog() {
            for l in logspace(1e-1, 1e3, 25) {
                let e = s.eval(l).unwrap();
                let (d1, d2) = richardson_derivatives(|x| s.phi_unchecked(x), l);
                assert!((d1 / e.phi_prime - 1.0).abs() < 1e-6, "{} phi' at {l}", s.name());
                assert!((d2 / e.phi_second - 1.0).abs() < 1e-6, "{} phi'' at {l}", s.name());
            }
        }
    }

    #[test]
    fn inverse_round_trip_and_lower_scaling() {
        for s in catalog() {
            let v = s.phi_inverse(s.phi(7.0).unwrap()).unwrap();
            assert!((v / 7.0 - 1.0).abs() < 1e-8, "{}", s.name());
            for eta in logspace(1e-3, 1e3, 40) {
                let Ok(base) = s.phi_inverse(eta) else { continue };
                let y = s.phi(base).unwrap();
                assert!(((y - eta) / eta).abs() <= 1e-10);
                for x in [2.0, 4.0, 8.0] {
                    if let Ok(v) = s.phi_inverse(eta * x) {
                        assert!(v / base >= x * (1.0 - 1e-9), "{} eta={eta} x={x}", s.name());
                    }
                }
            }
        }
        assert_eq!(LaplaceExponentSpec::stable(1.0).unwrap().phi_inverse(3.0).unwrap(), 9.0);
    }

    #[test]
    fn conjugate_geometric_inverse_grows_like_lambda_log_lambda() {
        let s = LaplaceExponentSpec::conjugate_geometric(1.0).unwrap();
        let r: Vec<f64> = [1e1, 1e2, 1e3, 1e4]
            .iter()
            .map(|&y: &f64| s.phi_inverse(y).unwrap() / (y * y.ln()))
            .collect();
        let (lo, hi) = r.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo <= 3.0, "{r:?}");
    }

    #[test]
    fn scaling_indices_examples() {
        let s = LaplaceExponentSpec::stable(1.2).unwrap();
        let rep = s.scaling_indices(ScalingTarget::Phi, (1.0, 1e6)).unwrap();
        assert!((rep.gamma - 0.6).abs() < 1e-3 && (rep.delta - 0.6).abs() < 1e-3);

        let s = LaplaceExponentSpec::conjugate_geometric(1.0).unwrap();
        let rep = s.scaling_indices(ScalingTarget::H, (1e2, 1e8)).unwrap();
        assert!(rep.gamma >= 0.8 && rep.delta <= 1.2, "{rep:?}");

        let s = LaplaceExponentSpec::conjugate_gamma();
        let rep = s.scaling_indices(ScalingTarget::H, (1e-6, 1e-1)).unwrap();
        assert!(rep.delta <= 2.0 + 1e-3 && rep.gamma >= 1.8, "{rep:?}");
        assert_eq!(rep.lambda_u, 2.0);
    }

    #[test]
    fn scaling_window_and_monotonicity_errors() {
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        assert!(matches!(
            s.scaling_indices(ScalingTarget::Phi, (1.0, 10.0)),
            Err(Error::Config(_))
        ));
        let d = LaplaceExponentSpec::pure_drift(1.0).unwrap();
        assert!(matches!(
            d.scaling_indices(ScalingTarget::H, (1.0, 1e4)),
            Err(Error::Diagnostic(_))
        ));
    }

    #[test]
    fn comparability_examples() {
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        let c = s.comparability((1e-4, 1e6)).unwrap();
        assert!((c.h_over_phi.inf - 0.5).abs() < 1e-14 && (c.h_over_phi.sup - 0.5).abs() < 1e-14);
        // H/(λ²(−φ″)) = (1 − a)/(a(1 − a)) = 1/a = 2/α
        let r = c.h_over_lambda2_second.unwrap();
        assert!((r.inf - 2.0).abs() < 1e-12 && (r.sup - 2.0).abs() < 1e-12);

        let g = LaplaceExponentSpec::conjugate_gamma();
        let c = g.comparability((1e2, 1e8)).unwrap();
        assert!(c.h_over_phi_trend < -0.05);
        assert!(c.h_over_phi.inf < 0.06);
        assert!(!c.h_phi_comparable());
        assert!(s.comparability((1e-4, 1e6)).unwrap().h_phi_comparable());
    }

    #[test]
    fn stable_tail_constant_inverts_the_representation() {
        // φ(λ) = λ ∫₀^∞ e^{−λy} μ(y,∞) dy
        for alpha in [0.6, 1.0, 1.5] {
            let c = stable_tail_constant(alpha);
            let a = 0.5 * alpha;
            let lambda: f64 = 3.0;
            let k = 4.0;
            let near = integrate(
                |s: f64| {
                    let y = s.powf(k);
                    (-lambda * y).exp() * c * y.powf(-a) * k * s.powf(k - 1.0)
                },
                0.0,
                1.0,
                Tolerance::new(0.0, 1e-12),
            )
            .unwrap()
            .value;
            let far = integrate(
                |u: f64| {
                    let y = u.exp();
                    (-lambda * y).exp() * c * y.powf(-a) * y
                },
                0.0,
                4.0,
                Tolerance::new(0.0, 1e-12),
            )
            .unwrap()
            .value;
            let phi = lambda * (near + far);
            assert!((phi / lambda.powf(a) - 1.0).abs() < 1e-8, "alpha={alpha}: {phi}");
        }
        let mu = LaplaceExponentSpec::stable(1.0).unwrap().known_levy_tail(1.0).unwrap();
        assert!((mu - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn levy_tail_bounds_and_identity() {
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        for r in [0.1, 1.0, 10.0] {
            let lt = s.levy_tail(r).unwrap();
            assert!(lt.sandwich_holds(), "{lt:?}");
            let (lhs, rhs) = stable_tail_identity(1.0, r).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{lhs} {rhs}");
        }
        let first = stable_tail_first_moment(1.0, 1.0).unwrap();
        assert!(first <= E * s.h(1.0).unwrap());
        let lt = s.levy_tail(1.0).unwrap();
        assert!((lt.upper_bound - E).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let s = LaplaceExponentSpec::from_json(r#"{"family":"stable","alpha":1.0,"drift_b":0}"#).unwrap();
        assert_eq!(s.family, Family::Stable { alpha: 1.0 });
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(LaplaceExponentSpec::from_json(&text).unwrap(), s);
        let t = LaplaceExponentSpec::from_json(
            r#"{"family":"user_table","points":[[1,1],[2,1.5],[4,2]]}"#,
        )
        .unwrap();
        assert!(matches!(t.family, Family::UserTable(_)));
        assert!(LaplaceExponentSpec::from_json(r#"{"family":"stable","alpha":2.5}"#).is_err());
        assert!(LaplaceExponentSpec::from_json(r#"{"family":"stable","alpha":1,"gamma":2}"#).is_err());
    }
}
