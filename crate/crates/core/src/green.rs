//! Green function G(r) = ∫₀^∞ p(t, r) dt of a transient subordinate
//! Brownian motion, and the envelope 1/(rᵈφ(r⁻²)).

use rayon::prelude::*;
use serde::Serialize;

use crate::bernstein::{Family, LaplaceExponentSpec, ScalingTarget};
use crate::error::{Error, Result};
use crate::grid::{logspace, slope};
use crate::heatkernel::p_reference;
use crate::quad::{integrate_breaks, Tolerance};
use crate::report::{argmax, BoundCheckReport};

/// Result of the dyadic divergence probe of ∫₀ y^{d−1}/φ(y²) dy.
#[derive(Clone, Debug, Serialize)]
pub struct Transience {
    pub transient: bool,
    /// Ratio of the two innermost dyadic shell integrals.
    pub shell_ratio: f64,
    /// ∫_{10⁻⁸}^1 y^{d−1}/φ(y²) dy.
    pub partial: f64,
}

const SHELL_FLOOR: f64 = 1e-8;

pub fn transience(spec: &LaplaceExponentSpec, d: usize) -> Result<Transience> {
    if d == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let f = |y: f64| y.powi(d as i32 - 1) / spec.phi_unchecked(y * y);
    // full shells [2^{-k-1}, 2^{-k}] down to the floor
    let kmax = (1.0 / SHELL_FLOOR).log2().floor() as i32;
    let mut shells = Vec::with_capacity(kmax as usize);
    for k in 0..kmax {
        let b = 2f64.powi(-k);
        let v = integrate_breaks(f, &[0.5 * b, b], Tolerance::new(0.0, 1e-10))?.value;
        shells.push(v);
    }
    let rest = integrate_breaks(f, &[SHELL_FLOOR, 2f64.powi(-kmax)], Tolerance::new(0.0, 1e-10))?.value;
    let n = shells.len();
    let q = shells[n - 1] / shells[n - 2];
    Ok(Transience {
        transient: q <= 1.0 - 1e-6,
        shell_ratio: q,
        partial: shells.iter().sum::<f64>() + rest,
    })
}

/// True iff the probe finds ∫₀ y^{d−1}/φ(y²) dy convergent.
pub fn transience_check(spec: &LaplaceExponentSpec, d: usize) -> Result<bool> {
    Ok(transience(spec, d)?.transient)
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenEstimate {
    pub r: f64,
    pub d: usize,
    #[serde(rename = "G")]
    pub g: f64,
    pub envelope: f64,
    pub refined_envelope: Option<f64>,
    pub ratio: f64,
    pub g_near: f64,
    pub g_far: f64,
}

pub fn envelope(spec: &LaplaceExponentSpec, r: f64, d: usize) -> Result<f64> {
    Ok(1.0 / (r.powi(d as i32) * spec.phi(r.powi(-2))?))
}

/// r^{2−d} log(1/r) for r < 1/2 and r^{2−d} otherwise (conjugate gamma, d ≥ 3).
pub fn refined_envelope(spec: &LaplaceExponentSpec, r: f64, d: usize) -> Option<f64> {
    if !matches!(spec.family, Family::ConjugateGamma) || d < 3 {
        return None;
    }
    let base = r.powi(2 - d as i32);
    Some(if r < 0.5 { base * (1.0 / r).ln() } else { base })
}

/// Stop marching decades once the extrapolated remainder is this small
/// relative to the accumulated integral.
const TAIL_SHARE: f64 = 1e-3;
const MAX_DECADES: usize = 80;

/// ∫ p(t, r) dt over [a, b] in ln t.
fn integrate_p(spec: &LaplaceExponentSpec, r: f64, d: usize, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let breaks: Vec<f64> = logspace(a, b, ((b / a).log10().ceil() as usize).max(1) + 1)
        .into_iter()
        .map(f64::ln)
        .collect();
    let v = integrate_breaks(
        |u: f64| {
            let t = u.exp();
            p_reference(spec, t, r, d).unwrap_or(f64::NAN) * t
        },
        &breaks,
        Tolerance::new(abs_tol, 1e-6),
    )?;
    if !v.value.is_finite() {
        return Err(Error::numeric("kernel evaluation failed inside the Green integral", &[("r", r)]));
    }
    Ok(v.value)
}

/// G(r) split at T* = 1/φ(r⁻²) (scaled by `split`): quadrature on
/// [T*·10⁻⁶, T*] (p ≍ t there, so the rest is ~10⁻¹² of the total), decade marching above T*, closed by the power tail
/// p(T)·T/(k − 1) with k the log-log decay rate over the last decade.
pub fn green_numeric_split(spec: &LaplaceExponentSpec, r: f64, d: usize, split: f64) -> Result<GreenEstimate> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("r={r} must be > 0")));
    }
    if !transience_check(spec, d)? {
        return Err(Error::Domain(format!("{} is not transient in d={d}", spec.name())));
    }
    let t_star = split / spec.phi(r.powi(-2))?;
    let env = envelope(spec, r, d)?;
    let abs_tol = 1e-8 * env;
    let g_near = integrate_p(spec, r, d, t_star * 1e-6, t_star, abs_tol)?;
    let mut g_far = 0.0;
    let mut lo = t_star;
    let mut closed = false;
    for k in 0..MAX_DECADES {
        let hi = lo * 10.0;
        g_far += integrate_p(spec, r, d, lo, hi, abs_tol)?;
        if k >= 1 {
            let p_hi = p_reference(spec, hi, r, d)?;
            let p_lo = p_reference(spec, lo, r, d)?;
            let rate = (p_lo / p_hi).log10();
            if rate > 1.0 {
                let tail = p_hi * hi / (rate - 1.0);
                if tail <= TAIL_SHARE * (g_near + g_far) {
                    g_far += tail;
                    closed = true;
                    break;
                }
            }
        }
        lo = hi;
    }
    if !closed {
        return Err(Error::numeric(
            "Green integral tail did not close",
            &[("r", r), ("t_max", lo)],
        ));
    }
    let g = g_near + g_far;
    Ok(GreenEstimate {
        r,
        d,
        g,
        envelope: env,
        refined_envelope: refined_envelope(spec, r, d),
        ratio: g / env,
        g_near,
        g_far,
    })
}

pub fn green_numeric(spec: &LaplaceExponentSpec, r: f64, d: usize) -> Result<GreenEstimate> {
    green_numeric_split(spec, r, d, 1.0)
}

pub const GREEN_COLUMNS: [&str; 6] = ["r", "d", "G", "envelope", "refined_envelope", "ratio"];

/// G ≍ 1/(rᵈφ(r⁻²)) over `rs`; for the conjugate gamma exponent in d ≥ 3
/// also the log-corrected form r^{2−d} log(1/r) and the log drift against
/// the Newtonian r^{2−d}.
pub fn verify_green(spec: &LaplaceExponentSpec, rs: &[f64], d: usize) -> Result<BoundCheckReport> {
    if rs.len() < 2 {
        return Err(Error::Config("verify_green needs at least two radii".into()));
    }
    let tr = transience(spec, d)?;
    if !tr.transient {
        return Err(Error::precondition(
            format!("{} is recurrent in d={d} (shell ratio {})", spec.name(), tr.shell_ratio),
            vec![format!("d={d}")],
        ));
    }
    let mut rs = rs.to_vec();
    rs.sort_by(f64::total_cmp);
    let mut rep = BoundCheckReport::new("green", &GREEN_COLUMNS);
    if d <= 2 && !spec.is_pure_drift() {
        let lo = rs.last().unwrap().powi(-2).min(1.0);
        let hi = rs[0].powi(-2).max(1e2);
        let sc = spec.scaling_indices(ScalingTarget::Phi, (lo, hi))?;
        rep.constant("delta", sc.delta);
        if !(sc.delta < 0.5 * d as f64) {
            return Err(Error::precondition(
                format!("upper scaling index delta={} is not below d/2", sc.delta),
                vec![format!("d={d}")],
            ));
        }
    }
    let est: Vec<Result<GreenEstimate>> = rs.par_iter().map(|&r| green_numeric(spec, r, d)).collect();
    let est = est.into_iter().collect::<Result<Vec<_>>>()?;
    for e in &est {
        rep.push(vec![
            e.r,
            d as f64,
            e.g,
            e.envelope,
            e.refined_envelope.unwrap_or(f64::NAN),
            e.ratio,
        ]);
    }
    let ratios: Vec<f64> = est.iter().map(|e| e.ratio).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lr: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let lratio: Vec<f64> = ratios.iter().map(|v| v.ln()).collect();
    let trend = slope(&lr, &lratio);
    rep.set_worst(argmax(&ratios.iter().map(|v| (v / lo).max(hi / v)).collect::<Vec<_>>()).unwrap());
    rep.constant("c", hi.max(1.0 / lo));
    rep.constant("spread", hi / lo);
    rep.constant("slope_log_r", trend);
    rep.constant("transience_shell_ratio", tr.shell_ratio);
    let monotone = est.windows(2).all(|w| w[1].g < w[0].g);
    if !monotone {
        rep.note("G is not decreasing in r on the grid");
    }
    let mut pass = hi / lo <= 10.0 && trend.abs() <= 0.2 && monotone && est.iter().all(|e| e.g > 0.0);

    if refined_envelope(spec, 1.0, d).is_some() {
        let small: Vec<&GreenEstimate> = est.iter().filter(|e| e.r < 0.5).collect();
        if small.len() >= 2 {
            let flat: Vec<f64> = small.iter().map(|e| e.g / e.refined_envelope.unwrap()).collect();
            let fl = flat.iter().cloned().fold(f64::INFINITY, f64::min);
            let fh = flat.iter().cloned().fold(0.0, f64::max);
            // against the Newtonian r^{2−d} the ratio should grow like log(1/r)
            let x: Vec<f64> = small.iter().map(|e| (1.0 / e.r).ln().ln()).collect();
            let y: Vec<f64> = small
                .iter()
                .map(|e| (e.g * e.r.powi(d as i32 - 2)).ln())
                .collect();
            let log_power = slope(&x, &y);
            rep.constant("refined_spread", fh / fl);
            rep.constant("newtonian_log_power", log_power);
            rep.note("refined form r^(2-d) log(1/r); newtonian_log_power is the slope of log(G r^(d-2)) against log log(1/r)");
            pass &= fh / fl <= 2.0 && (0.5..=1.5).contains(&log_power);
        }
    }
    rep.pass = pass;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn transience_examples() {
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        assert!(transience_check(&s, 3).unwrap());
        assert!(!transience_check(&s, 1).unwrap());
        assert!(transience_check(&LaplaceExponentSpec::conjugate_gamma(), 3).unwrap());
        assert!(!transience_check(&LaplaceExponentSpec::conjugate_gamma(), 2).unwrap());
    }

    #[test]
    fn riesz_and_newton() {
        let s = LaplaceExponentSpec::stable(1.0).unwrap();
        let g = green_numeric(&s, 1.0, 3).unwrap();
        assert!((g.g * 2.0 * PI * PI - 1.0).abs() < 1e-2, "{}", g.g);
        assert!(g.g_near >= 0.0 && g.g_far >= 0.0);
        let b = LaplaceExponentSpec::pure_drift(1.0).unwrap();
        let g = green_numeric(&b, 1.0, 3).unwrap();
        assert!((g.g * 4.0 * PI - 1.0).abs() < 1e-2, "{}", g.g);
        assert!(green_numeric(&s, 1.0, 1).is_err());
    }
}
