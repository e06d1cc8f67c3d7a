//! Structural invariants of a Laplace exponent and its heat kernel, each
//! reduced to one worst-case number compared against a fixed tolerance.

use serde::Serialize;

use crate::bernstein::{stable_tail_identity, LaplaceExponentSpec};
use crate::error::Result;
use crate::grid::logspace;
use crate::special::gamma;
use crate::heatkernel::{
    chapman_kolmogorov, chi_square_sandwich, chi_square_tail, mass_inside, p_fourier, sbm_tail, total_mass,
};

#[derive(Clone, Debug, Serialize)]
pub struct InvariantResult {
    pub name: String,
    /// Worst observed deviation, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl InvariantResult {
    fn new(name: &str, worst: f64, tolerance: f64, detail: String) -> Self {
        InvariantResult {
            name: name.to_string(),
            worst,
            tolerance,
            pass: worst <= tolerance,
            detail,
        }
    }
}

pub const MASS_TOL: f64 = 1e-4;
pub const CK_TOL: f64 = 1e-5;
pub const MONOTONE_SLACK: f64 = 1e-9;
pub const DOUBLING_TOL: f64 = 1e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const TAIL_CONSISTENCY_TOL: f64 = 1e-4;
pub const LEVY_IDENTITY_TOL: f64 = 1e-8;

const TIMES: [f64; 3] = [1e-2, 1e-1, 1.0];

/// ∫ p(t, x) dx = 1.
pub fn normalization(spec: &LaplaceExponentSpec, d: usize) -> Result<InvariantResult> {
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for t in TIMES {
        let err = (total_mass(spec, t, d)? - 1.0).abs();
        if err > worst {
            worst = err;
            at = t;
        }
    }
    Ok(InvariantResult::new("normalization", worst, MASS_TOL, format!("|mass - 1| largest at t={at}")))
}

/// p(2t, 0) = ∫ p(t, y)² dy in d = 1.
pub fn chapman_kolmogorov_check(spec: &LaplaceExponentSpec) -> Result<InvariantResult> {
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for t in TIMES {
        let (direct, conv) = chapman_kolmogorov(spec, t)?;
        let err = (conv / direct - 1.0).abs();
        if err > worst {
            worst = err;
            at = t;
        }
    }
    Ok(InvariantResult::new(
        "chapman_kolmogorov",
        worst,
        CK_TOL,
        format!("relative gap largest at t={at}"),
    ))
}

/// r ↦ p(t, r) is non-increasing; reports the largest relative rise.
pub fn radial_monotonicity(spec: &LaplaceExponentSpec, d: usize) -> Result<InvariantResult> {
    let rs = logspace(1e-3, 10.0, 40);
    let mut worst: f64 = 0.0;
    let mut detail = String::from("no increase");
    for t in [1e-3, 1e-2, 1e-1, 1.0] {
        let top = p_fourier(spec, t, 0.0, d)?;
        let mut prev = top;
        for &r in &rs {
            let p = p_fourier(spec, t, r, d)?;
            let rise = (p - prev) / top;
            if rise > worst {
                worst = rise;
                detail = format!("t={t}, r={r}");
            }
            prev = p;
        }
    }
    Ok(InvariantResult::new("radial_monotonicity", worst, MONOTONE_SLACK, detail))
}

/// φ(xλ) ≤ xφ(λ) and H(xλ) ≤ x²H(λ) for x ≥ 1.
pub fn doubling(spec: &LaplaceExponentSpec) -> Result<InvariantResult> {
    let mut worst: f64 = 0.0;
    let mut detail = String::from("no violation");
    for l in logspace(1e-6, 1e8, 120) {
        let (p, h) = (spec.phi(l)?, spec.h(l)?);
        for x in [2.0, 4.0, 8.0] {
            let ep = spec.phi(x * l)? / (x * p) - 1.0;
            let eh = spec.h(x * l)? / (x * x * h) - 1.0;
            if ep > worst {
                worst = ep;
                detail = format!("phi at lambda={l}, x={x}");
            }
            if eh > worst {
                worst = eh;
                detail = format!("H at lambda={l}, x={x}");
            }
        }
    }
    Ok(InvariantResult::new("doubling", worst, DOUBLING_TOL, detail))
}

/// φ(φ⁻¹(y)) = y for y = φ(λ), λ ∈ [10⁻⁶, 10¹²].
pub fn inverse_round_trip(spec: &LaplaceExponentSpec) -> Result<InvariantResult> {
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for y in logspace(spec.phi(1e-6)?, spec.phi(1e12)?, 60) {
        let err = (spec.phi(spec.phi_inverse(y)?)? / y - 1.0).abs();
        if err > worst {
            worst = err;
            at = y;
        }
    }
    Ok(InvariantResult::new("inverse_round_trip", worst, ROUND_TRIP_TOL, format!("largest at y={at}")))
}

/// Chi-square tail sandwich on [1, 200], and P(|X_t| ≥ r) computed through
/// the chi-square mixture against 1 − ∫_{|x|<r} p(t, x) dx.
///
/// The ratio P(Y ≥ y)/(y^{d/2−1}e^{−y/2}) is monotone in y with limit
/// 2^{1−d/2}/Γ(d/2), so its spread on [1, 200] may not exceed the spread
/// between y = 1 and the limit.
pub fn chi_square_tails(spec: &LaplaceExponentSpec, d: usize) -> Result<Vec<InvariantResult>> {
    let (c, spread) = chi_square_sandwich(d, 1.0, 200.0);
    let h = 0.5 * d as f64;
    let at_one = chi_square_tail(d, 1.0) / (-0.5f64).exp();
    let limit = 2f64.powf(1.0 - h) / gamma(h);
    let bound = (at_one / limit).max(limit / at_one) * (1.0 + 1e-9);
    let sandwich = InvariantResult::new(
        "chi_square_sandwich",
        spread,
        bound,
        format!("c={c} on y in [1, 200]"),
    );
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for (t, r) in [(0.1, 0.5), (1.0, 1.0), (1.0, 3.0)] {
        let mixture = sbm_tail(spec, t, r, d)?;
        let direct = 1.0 - mass_inside(spec, t, r, d)?;
        let err = (mixture - direct).abs();
        if err >= worst {
            worst = err;
            detail = format!("t={t}, r={r}: mixture {mixture}, direct {direct}");
        }
    }
    let consistency = InvariantResult::new("sbm_tail_consistency", worst, TAIL_CONSISTENCY_TOL, detail);
    Ok(vec![sandwich, consistency])
}

/// μ(r,∞) + r⁻²∫_{(0,r]} y²μ(dy) = 2r⁻²∫₀ʳ yμ(y,∞)dy for stable Lévy measures.
pub fn levy_identity() -> Result<InvariantResult> {
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for alpha in [0.6, 1.0, 1.4] {
        for r in [0.1, 1.0, 10.0] {
            let (lhs, rhs) = stable_tail_identity(alpha, r)?;
            let err = (lhs / rhs - 1.0).abs();
            if err >= worst {
                worst = err;
                detail = format!("alpha={alpha}, r={r}");
            }
        }
    }
    Ok(InvariantResult::new("levy_tail_identity", worst, LEVY_IDENTITY_TOL, detail))
}

/// Every invariant for `spec` in dimension `d`; Chapman-Kolmogorov is
/// checked in d = 1.
pub fn run_all(spec: &LaplaceExponentSpec, d: usize) -> Result<Vec<InvariantResult>> {
    let mut out = vec![
        normalization(spec, d)?,
        chapman_kolmogorov_check(spec)?,
        radial_monotonicity(spec, d)?,
        doubling(spec)?,
        inverse_round_trip(spec)?,
    ];
    out.extend(chi_square_tails(spec, d)?);
    out.push(levy_identity()?);
    Ok(out)
}
