//! Marginal laws of a subordinator and the tail bound checks.
//!
//! The law of `S_t` is recovered from `E e^{−λS_t} = e^{−tφ(λ)}` by
//! Gaver–Stehfest inversion on the positive real axis: the density from
//! `e^{−tφ(λ)}`, the distribution function from `e^{−tφ(λ)}/λ` and the
//! upper tail from `(1 − e^{−tφ(λ)})/λ`. Catalog exponents are inverted at
//! order 24 in double-double arithmetic; tables at order 14 in `f64`.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::Arc;

use rand::RngExt;
use rayon::prelude::*;

use crate::bernstein::LaplaceExponentSpec;
use crate::error::{Error, Result};
use crate::grid::{logspace, median, slopes2};
use crate::dd::Dd;
use crate::laplace::Stehfest;
use crate::report::{argmax, argmin, BoundCheckReport};
use crate::rng;

pub const CATALOG_ORDER: usize = 24;
pub const TABLE_ORDER: usize = 14;
pub const GRID_POINTS: usize = 2048;
/// Mass left outside the support hint on each side.
pub const SUPPORT_EPS: f64 = 1e-6;
const MONOTONE_SLACK: f64 = 1e-4;
const MASS_DRIFT: f64 = 1e-3;

pub const TAIL_COLUMNS: [&str; 7] = ["t", "r", "regime_lhs", "tail_prob", "tH", "ratio", "stderr"];

#[derive(Clone, Debug)]
enum Shape {
    PointMass(f64),
    Continuous {
        s: Vec<f64>,
        cdf: Vec<f64>,
        tail: Vec<f64>,
        mass: f64,
    },
    /// No table: every query inverts the transform directly.
    Pointwise,
}

/// Distribution of `S_t` for one fixed `t`.
#[derive(Clone, Debug)]
pub struct SubordinatorLaw {
    spec: LaplaceExponentSpec,
    t: f64,
    stehfest: Arc<Stehfest>,
    support: (f64, f64),
    shape: Shape,
}

impl SubordinatorLaw {
    pub fn new(spec: &LaplaceExponentSpec, t: f64) -> Result<Self> {
        let mut law = Self::pointwise(spec, t)?;
        if law.point_mass().is_none() {
            law.shape = law.tabulate()?;
        }
        Ok(law)
    }

    /// The law without the tabulated distribution function. Pointwise
    /// queries (cdf, tail_prob, density) work even where ringing of the
    /// inversion near a steep edge makes the table fail its monotonicity
    /// or mass checks; sampling needs the table and is refused.
    pub fn pointwise(spec: &LaplaceExponentSpec, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("law: t={t} must be > 0")));
        }
        if !spec.has_admissible_drift() {
            return Err(Error::precondition(
                "law requires zero drift or the pure_drift family",
                vec![spec.name()],
            ));
        }
        let order = if spec.is_catalog() {
            CATALOG_ORDER
        } else {
            TABLE_ORDER
        };
        let mut law = SubordinatorLaw {
            spec: spec.clone(),
            t,
            stehfest: Arc::new(Stehfest::new(order)),
            support: (0.0, 0.0),
            shape: Shape::PointMass(0.0),
        };
        if spec.is_pure_drift() {
            let at = spec.drift_b * t;
            law.support = (at, at);
            law.shape = Shape::PointMass(at);
            return Ok(law);
        }
        law.shape = Shape::Pointwise;
        law.support = law.locate_support()?;
        Ok(law)
    }

    pub fn spec(&self) -> &LaplaceExponentSpec {
        &self.spec
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn inversion_order(&self) -> usize {
        self.stehfest.order()
    }

    /// (s_lo, s_hi) with at most 10⁻⁶ mass on either side.
    pub fn support_hint(&self) -> (f64, f64) {
        self.support
    }

    pub fn point_mass(&self) -> Option<f64> {
        match self.shape {
            Shape::PointMass(at) => Some(at),
            _ => None,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        !matches!(self.shape, Shape::Pointwise)
    }

    fn raw(&self, s: f64, kind: Transform) -> f64 {
        let t = self.t;
        let spec = &self.spec;
        if spec.is_catalog() {
            self.stehfest.invert_dd(
                |l| {
                    let tphi = spec.phi_dd(l).expect("catalog exponent").mul_f64(t);
                    match kind {
                        Transform::Density => (-tphi).exp(),
                        Transform::Cdf => (-tphi).exp() / l,
                        Transform::Tail => -(-tphi).exp_m1() / l,
                    }
                },
                s,
            )
        } else {
            self.stehfest.invert(
                |l| {
                    let tphi = t * spec.phi_unchecked(l);
                    match kind {
                        Transform::Density => (-tphi).exp(),
                        Transform::Cdf => (-tphi).exp() / l,
                        Transform::Tail => -(-tphi).exp_m1() / l,
                    }
                },
                s,
            )
        }
    }

    /// (cdf, tail, density) transforms inverted together.
    fn raw_all(&self, s: f64) -> (f64, f64, f64) {
        let t = self.t;
        let spec = &self.spec;
        if spec.is_catalog() {
            let [c, q, f] = self.stehfest.invert_dd_many(
                |l| {
                    let tphi = spec.phi_dd(l).expect("catalog exponent").mul_f64(t);
                    let e = (-tphi).exp();
                    let em1 = if tphi.to_f64() <= 0.5 { (-tphi).exp_m1() } else { e - Dd::ONE };
                    [e / l, -em1 / l, e]
                },
                s,
            );
            (c, q, f)
        } else {
            (
                self.raw(s, Transform::Cdf),
                self.raw(s, Transform::Tail),
                self.raw(s, Transform::Density),
            )
        }
    }

    /// P(S_t ≤ s).
    pub fn cdf(&self, s: f64) -> f64 {
        if let Shape::PointMass(at) = self.shape {
            return if s >= at { 1.0 } else { 0.0 };
        }
        if !(s > 0.0) {
            return 0.0;
        }
        let c = self.raw(s, Transform::Cdf);
        if c < 0.5 {
            c.clamp(0.0, 1.0)
        } else {
            (1.0 - self.raw(s, Transform::Tail)).clamp(0.0, 1.0)
        }
    }

    /// P(S_t ≥ r), clipped to [0, 1].
    pub fn tail_prob(&self, r: f64) -> f64 {
        if let Shape::PointMass(at) = self.shape {
            return if r <= at { 1.0 } else { 0.0 };
        }
        if !(r > 0.0) {
            return 1.0;
        }
        let c = self.raw(r, Transform::Cdf);
        if c < 0.5 {
            (1.0 - c).clamp(0.0, 1.0)
        } else {
            self.raw(r, Transform::Tail).clamp(0.0, 1.0)
        }
    }

    /// Density of S_t after clipping and renormalization; zero for a point mass.
    pub fn density(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::PointMass(_) => 0.0,
            Shape::Pointwise => {
                if !(s > 0.0) {
                    0.0
                } else {
                    self.raw(s, Transform::Density).max(0.0)
                }
            }
            Shape::Continuous { mass, .. } => {
                if !(s > 0.0) {
                    0.0
                } else {
                    self.raw(s, Transform::Density).max(0.0) / mass
                }
            }
        }
    }

    fn locate_support(&self) -> Result<(f64, f64)> {
        let s0 = self
            .spec
            .phi_inverse(1.0 / self.t)
            .ok()
            .filter(|v| v.is_finite() && *v > 0.0)
            .map_or(1.0, |v| 1.0 / v);
        let lo = self.quantile_bracket(s0, |s| self.raw(s, Transform::Cdf), 0.1)?;
        let hi = self.quantile_bracket(s0, |s| self.raw(s, Transform::Tail), 10.0)?;
        Ok((lo, hi))
    }

    /// Walks from `s0` by `factor` until `g(s) ≤ SUPPORT_EPS`, then bisects
    /// in ln s for g = SUPPORT_EPS.
    fn quantile_bracket<G: Fn(f64) -> f64>(&self, s0: f64, g: G, factor: f64) -> Result<f64> {
        let mut inner = s0;
        let mut outer = s0;
        let mut steps = 0;
        while g(outer) > SUPPORT_EPS {
            inner = outer;
            outer *= factor;
            steps += 1;
            if steps > 60 || outer == 0.0 || !outer.is_finite() {
                return Err(Error::numeric(
                    "could not bracket the support of the law",
                    &[("t", self.t), ("s0", s0), ("s", outer)],
                ));
            }
        }
        if steps == 0 {
            return Ok(outer);
        }
        for _ in 0..40 {
            let mid = (inner * outer).sqrt();
            if g(mid) > SUPPORT_EPS {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        Ok(outer)
    }

    fn tabulate(&self) -> Result<Shape> {
        let (lo, hi) = self.support;
        let s = logspace(lo, hi, GRID_POINTS);
        let raw: Vec<(f64, f64, f64)> = s
            .par_iter()
            .map(|&x| self.raw_all(x))
            .collect();
        let mut cdf: Vec<f64> = raw.iter().map(|r| r.0).collect();
        let mut tail: Vec<f64> = raw.iter().map(|r| r.1).collect();
        let dens: Vec<f64> = raw.iter().map(|r| r.2.max(0.0)).collect();
        let worst_drop = cdf
            .windows(2)
            .map(|w| w[0] - w[1])
            .chain(tail.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max);
        if worst_drop > MONOTONE_SLACK {
            return Err(Error::numeric(
                "inverted distribution function is not monotone",
                &[("t", self.t), ("worst_drop", worst_drop)],
            ));
        }
        let mut run = 0.0f64;
        for c in cdf.iter_mut() {
            run = run.max(c.clamp(0.0, 1.0));
            *c = run;
        }
        let mut run = 1.0f64;
        for q in tail.iter_mut() {
            run = run.min(q.clamp(0.0, 1.0));
            *q = run;
        }
        // trapezoid rule in ln s for ∫ f(s) s d(ln s)
        let h = (hi / lo).ln() / (GRID_POINTS - 1) as f64;
        let inner: f64 = dens
            .iter()
            .zip(&s)
            .enumerate()
            .map(|(i, (f, x))| {
                let w = if i == 0 || i == GRID_POINTS - 1 { 0.5 } else { 1.0 };
                w * f * x
            })
            .sum::<f64>()
            * h;
        let mass = inner + cdf[0] + tail[GRID_POINTS - 1];
        if (mass - 1.0).abs() > MASS_DRIFT || !mass.is_finite() {
            return Err(Error::numeric(
                "inverted density does not integrate to one",
                &[("t", self.t), ("mass", mass)],
            ));
        }
        Ok(Shape::Continuous {
            s,
            cdf,
            tail,
            mass,
        })
    }

    /// Quantile from the tabulated grid (no refinement).
    fn grid_quantile(&self, u: f64) -> f64 {
        let (s, cdf, tail) = match &self.shape {
            Shape::PointMass(at) => return *at,
            Shape::Continuous { s, cdf, tail, .. } => (s, cdf, tail),
            Shape::Pointwise => {
                let (mut a, mut b) = (self.support.0.ln(), self.support.1.ln());
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m.exp()) < u {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return (0.5 * (a + b)).exp();
            }
        };
        let n = s.len();
        if u < 0.5 {
            let i = cdf.partition_point(|&c| c <= u);
            let i = i.clamp(1, n - 1);
            log_interp(cdf[i - 1], cdf[i], s[i - 1], s[i], u)
        } else {
            let v = 1.0 - u;
            // tail is nonincreasing
            let i = tail.partition_point(|&q| q > v);
            let i = i.clamp(1, n - 1);
            log_interp(tail[i - 1], tail[i], s[i - 1], s[i], v)
        }
    }

    /// Quantile read off the tabulated grid, without refinement.
    pub fn approx_quantile(&self, p: f64) -> f64 {
        self.grid_quantile(p.clamp(1e-12, 1.0 - 1e-12))
    }

    /// Quantile function, refined by bisection on the inverted distribution.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level {p} outside (0,1)")));
        }
        if let Shape::PointMass(at) = self.shape {
            return Ok(at);
        }
        let guess = self.grid_quantile(p);
        let (mut a, mut b) = (guess * 0.98, guess * 1.02);
        while self.cdf(a) > p {
            a *= 0.9;
        }
        while self.cdf(b) < p {
            b *= 1.1;
        }
        for _ in 0..50 {
            let m = (a * b).sqrt();
            if self.cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        Ok((a * b).sqrt())
    }

    /// `n` draws by inverse transform on the tabulated distribution function.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.sample_stream(n, seed, 0)
    }

    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
        if !self.is_tabulated() {
            return Err(Error::Diagnostic(format!(
                "law at t={} has no table; sampling unavailable",
                self.t
            )));
        }
        let mut rng = rng::stream(seed, stream);
        Ok((0..n)
            .map(|_| {
                let mut u: f64 = rng.random();
                while u == 0.0 {
                    u = rng.random();
                }
                self.grid_quantile(u)
            })
            .collect())
    }
}

#[derive(Clone, Copy)]
enum Transform {
    Density,
    Cdf,
    Tail,
}

/// Interpolates ln s linearly in ln y between (y0, s0) and (y1, s1);
/// extrapolates the same segment outside it.
fn log_interp(y0: f64, y1: f64, s0: f64, s1: f64, y: f64) -> f64 {
    if y0 > 0.0 && y1 > 0.0 && y > 0.0 && y0 != y1 {
        let w = (y.ln() - y0.ln()) / (y1.ln() - y0.ln());
        (s0.ln() + w * (s1.ln() - s0.ln())).exp()
    } else if y0 != y1 {
        let w = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        s0 + w * (s1 - s0)
    } else {
        (s0 * s1).sqrt()
    }
}

pub fn law(spec: &LaplaceExponentSpec, t: f64) -> Result<SubordinatorLaw> {
    SubordinatorLaw::new(spec, t)
}

pub fn sample(law: &SubordinatorLaw, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    law.sample(n, seed)
}

pub fn tail_prob(law: &SubordinatorLaw, r: f64) -> f64 {
    law.tail_prob(r)
}

/// (t, r) pairs for the tail bound checks, all inside the regime
/// tφ(1/r) ≤ (1 − ε)/e.
#[derive(Clone, Debug)]
pub struct TailCheckGrid {
    pub pairs: Vec<(f64, f64)>,
    pub epsilon: f64,
    pub sample_count: usize,
    pub seed: u64,
}

pub const MIN_SAMPLES: usize = 10_000;

impl TailCheckGrid {
    /// Product grid filtered to the regime.
    pub fn product(
        spec: &LaplaceExponentSpec,
        ts: &[f64],
        rs: &[f64],
        epsilon: f64,
        sample_count: usize,
        seed: u64,
    ) -> Result<Self> {
        let bound = (1.0 - epsilon) / E;
        let mut pairs = Vec::new();
        for &t in ts {
            for &r in rs {
                if t * spec.phi(1.0 / r)? <= bound {
                    pairs.push((t, r));
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::Config("no grid point satisfies the tail regime".into()));
        }
        let grid = TailCheckGrid {
            pairs,
            epsilon,
            sample_count,
            seed,
        };
        grid.validate(spec)?;
        Ok(grid)
    }

    pub fn validate(&self, spec: &LaplaceExponentSpec) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon={} outside (0,1)", self.epsilon)));
        }
        if self.sample_count < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "sample_count={} below {MIN_SAMPLES}",
                self.sample_count
            )));
        }
        self.check_regime(spec, (1.0 - self.epsilon) / E)
    }

    fn check_regime(&self, spec: &LaplaceExponentSpec, bound: f64) -> Result<()> {
        let mut bad = Vec::new();
        for &(t, r) in &self.pairs {
            if !(t > 0.0 && r > 0.0) {
                bad.push(format!("t={t}, r={r}"));
                continue;
            }
            let lhs = t * spec.phi(1.0 / r)?;
            if lhs > bound {
                bad.push(format!("t={t}, r={r}: tφ(1/r)={lhs}"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::precondition(
                format!("grid points outside the regime tφ(1/r) <= {bound}"),
                bad,
            ))
        }
    }

    fn times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.pairs.iter().map(|p| p.0).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

/// Laws and Monte Carlo samples for every distinct time of a grid. When
/// the table of a law fails its checks the slice keeps the pointwise law
/// and no draws (empty vector), and the time is listed in `untabulated`.
struct TimeSlices {
    laws: BTreeMap<u64, (SubordinatorLaw, Vec<f64>)>,
    untabulated: Vec<(f64, String)>,
}

impl TimeSlices {
    fn build(spec: &LaplaceExponentSpec, grid: &TailCheckGrid) -> Result<Self> {
        let ts = grid.times();
        type Built = (u64, (SubordinatorLaw, Vec<f64>), Option<String>);
        let built: Vec<Result<Built>> = ts
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                let law = match SubordinatorLaw::new(spec, t) {
                    Ok(law) => law,
                    Err(Error::Numeric { message, .. }) => {
                        return Ok((t.to_bits(), (SubordinatorLaw::pointwise(spec, t)?, Vec::new()), Some(message)))
                    }
                    Err(e) => return Err(e),
                };
                let mut draws = law.sample_stream(grid.sample_count, grid.seed, i as u64)?;
                draws.sort_by(f64::total_cmp);
                Ok((t.to_bits(), (law, draws), None))
            })
            .collect();
        let mut laws = BTreeMap::new();
        let mut untabulated = Vec::new();
        for b in built {
            let (key, slice, why) = b?;
            if let Some(why) = why {
                untabulated.push((f64::from_bits(key), why));
            }
            laws.insert(key, slice);
        }
        Ok(TimeSlices { laws, untabulated })
    }

    fn annotate(&self, rep: &mut BoundCheckReport) {
        for (t, why) in &self.untabulated {
            rep.note(format!("t={t}: {why}; tails inverted pointwise, Monte Carlo skipped"));
        }
    }

    fn get(&self, t: f64) -> &(SubordinatorLaw, Vec<f64>) {
        &self.laws[&t.to_bits()]
    }
}

/// Empirical P(S ≥ x) from sorted draws, with its binomial standard error;
/// NaN without draws.
fn empirical_tail(sorted: &[f64], x: f64) -> (f64, f64) {
    if sorted.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = sorted.len() as f64;
    let below = sorted.partition_point(|&s| s < x) as f64;
    let p = (n - below) / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

fn mc_disagreements(rows: &[(f64, f64, f64)]) -> usize {
    // (exact, mc, stderr); a gap beyond 5 standard errors (or 5/n) is noted
    rows.iter()
        .filter(|(p, m, se)| (p - m).abs() > 5.0 * se.max(1e-4))
        .count()
}

/// Upper tail: P(S_t ≥ r(1 + etφ(1/r))) ≤ C_S·tH(1/r) with one fitted C_S.
pub fn check_upper_tail(spec: &LaplaceExponentSpec, grid: &TailCheckGrid) -> Result<BoundCheckReport> {
    grid.validate(spec)?;
    let slices = TimeSlices::build(spec, grid)?;
    let mut rep = BoundCheckReport::new("upper_tail", &TAIL_COLUMNS);
    slices.annotate(&mut rep);
    let mut mc = Vec::new();
    for &(t, r) in &grid.pairs {
        let (law, draws) = slices.get(t);
        let lhs = t * spec.phi(1.0 / r)?;
        let x = r * (1.0 + E * lhs);
        let p = law.tail_prob(x);
        let th = t * spec.h(1.0 / r)?;
        let (pm, se) = empirical_tail(draws, x);
        mc.push((p, pm, se));
        rep.push(vec![t, r, lhs, p, th, p / th, se]);
    }
    let ratios = rep.column("ratio").unwrap();
    let i = argmax(&ratios).unwrap();
    let c_s = ratios[i];
    let med = median(&ratios);
    rep.set_worst(i);
    rep.constant("C_S", c_s);
    rep.constant("median_ratio", med);
    rep.constant("epsilon", grid.epsilon);
    rep.pass = c_s.is_finite() && c_s < 10.0 * med;
    let off = mc_disagreements(&mc);
    if off > 0 {
        rep.note(format!("{off} points where Monte Carlo and inversion tails differ by > 5 stderr"));
    }
    Ok(rep)
}

/// Fitted C_S on the same (t, r) candidates at two regime margins. Returns
/// (C_S at `eps_small`, C_S at `eps_large`, (1 + e(1 − eps_small))²).
pub fn upper_tail_margin_sensitivity(
    spec: &LaplaceExponentSpec,
    ts: &[f64],
    rs: &[f64],
    eps_small: f64,
    eps_large: f64,
    sample_count: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let wide = TailCheckGrid::product(spec, ts, rs, eps_small, sample_count, seed)?;
    let narrow = TailCheckGrid::product(spec, ts, rs, eps_large, sample_count, seed)?;
    let a = check_upper_tail(spec, &wide)?.get("C_S").unwrap();
    let b = check_upper_tail(spec, &narrow)?.get("C_S").unwrap();
    let theta = 1.0 - eps_small;
    Ok((a, b, (1.0 + E * theta).powi(2)))
}

/// Lower tail: P(S_t ≥ r) ≥ 1 − e^{−tμ(r,∞)}, using the closed Lévy tail
/// when known and otherwise the lower bound (M²/2)H(1/r).
pub fn check_lower_tail(spec: &LaplaceExponentSpec, grid: &TailCheckGrid) -> Result<BoundCheckReport> {
    grid.validate(spec)?;
    let slices = TimeSlices::build(spec, grid)?;
    let mut rep = BoundCheckReport::new("lower_tail", &["t", "r", "tail_prob", "lower_bound", "ratio", "stderr"]);
    slices.annotate(&mut rep);
    let mut violations = 0;
    let mut skipped = 0;
    for &(t, r) in &grid.pairs {
        let (law, draws) = slices.get(t);
        let mu = match spec.known_levy_tail(r) {
            Some(mu) => mu,
            None => match spec.levy_tail(r)?.lower_bound {
                Some(lo) => lo,
                None => {
                    skipped += 1;
                    continue;
                }
            },
        };
        let rhs = -(-t * mu).exp_m1();
        let p = law.tail_prob(r);
        let (_, se) = empirical_tail(draws, r);
        if p < rhs * (1.0 - 1e-4) - 1e-9 {
            violations += 1;
        }
        rep.push(vec![t, r, p, rhs, p / rhs, se]);
    }
    if rep.rows.is_empty() {
        return Err(Error::precondition(
            "no grid point admits a Lévy-tail lower bound",
            vec![spec.name()],
        ));
    }
    let ratios = rep.column("ratio").unwrap();
    let i = argmin(&ratios).unwrap();
    rep.set_worst(i);
    rep.constant("min_ratio", ratios[i]);
    rep.constant("violations", violations as f64);
    if skipped > 0 {
        rep.note(format!("{skipped} points skipped: outside 0 < r < M/λ_U"));
    }
    if !spec.known_levy_tail(1.0).is_some() {
        rep.note("μ(r,∞) replaced by its lower bound (M²/2)H(1/r)");
    }
    rep.pass = violations == 0;
    Ok(rep)
}

/// ρ-interval bound: P(1/(2φ⁻¹(1/t)) ≤ S_t ≤ 1/φ⁻¹(ρ/t)) ≥ τ with
/// τ = 1 − (1 − e^{−ρ})/(1 − e^{−1}) − e^{−1/2}.
pub fn explicit_interval_tau(rho: f64) -> f64 {
    1.0 - (-(-rho).exp_m1()) / (-(-1.0f64).exp_m1()) - (-0.5f64).exp()
}

pub const DEFAULT_INTERVAL_L: f64 = 8.0;
pub const DEFAULT_RHO: f64 = 0.05;

/// Interval probabilities P(r ≤ S_t ≤ Lr) ≥ c_S tH(1/r), plus the explicit
/// ρ-interval bound at every time of the grid.
pub fn check_interval_prob(
    spec: &LaplaceExponentSpec,
    grid: &TailCheckGrid,
    l: f64,
) -> Result<BoundCheckReport> {
    if !(l > 1.0) {
        return Err(Error::Config(format!("interval width L={l} must exceed 1")));
    }
    grid.validate(spec)?;
    grid.check_regime(spec, 1.0)?;
    let slices = TimeSlices::build(spec, grid)?;
    let mut rep = BoundCheckReport::new(
        "interval_prob",
        &["t", "r", "L", "interval_prob", "tH", "ratio", "stderr"],
    );
    slices.annotate(&mut rep);
    let mut noisy = 0;
    for &(t, r) in &grid.pairs {
        let (law, draws) = slices.get(t);
        let p = law.tail_prob(r) - law.tail_prob(l * r);
        let th = t * spec.h(1.0 / r)?;
        let (a, _) = empirical_tail(draws, r);
        let (b, _) = empirical_tail(draws, l * r);
        let pm = a - b;
        let se = (pm * (1.0 - pm) / draws.len() as f64).sqrt();
        if p <= 1e-9 {
            noisy += 1;
        }
        rep.push(vec![t, r, l, p, th, p / th, se]);
    }
    let ratios = rep.column("ratio").unwrap();
    let i = argmin(&ratios).unwrap();
    let c_s = ratios[i];
    rep.set_worst(i);
    rep.constant("c_S", c_s);
    rep.constant("L", l);

    let tau = explicit_interval_tau(DEFAULT_RHO);
    rep.constant("rho", DEFAULT_RHO);
    rep.constant("tau", tau);
    let mut min_gs = f64::INFINITY;
    let mut min_mc = f64::INFINITY;
    for t in grid.times() {
        let (law, draws) = slices.get(t);
        let lo = 0.5 / spec.phi_inverse(1.0 / t)?;
        let hi = 1.0 / spec.phi_inverse(DEFAULT_RHO / t)?;
        let gs = law.tail_prob(lo) - law.tail_prob(hi);
        let mc = empirical_tail(draws, lo).0 - empirical_tail(draws, hi).0;
        min_gs = min_gs.min(gs);
        if !draws.is_empty() {
            min_mc = min_mc.min(mc);
        }
    }
    rep.constant("explicit_min_inversion", min_gs);
    if min_mc.is_finite() {
        rep.constant("explicit_min_mc", min_mc);
    }
    let explicit_ok = min_gs >= tau && (min_mc >= tau || !min_mc.is_finite());
    if !explicit_ok {
        rep.note(format!(
            "explicit interval bound violated: min probability {min_gs} (inversion), {min_mc} (MC) < tau={tau}"
        ));
    }
    if noisy > 0 {
        rep.note(format!("{noisy} interval probabilities at the inversion noise floor"));
    }
    rep.pass = c_s > 0.0 && noisy == 0 && explicit_ok;
    Ok(rep)
}

/// Two-sided tail sandwich P(S_t ≥ r) ≍ tH(1/r).
pub fn check_two_sided(spec: &LaplaceExponentSpec, grid: &TailCheckGrid) -> Result<BoundCheckReport> {
    grid.validate(spec)?;
    let mut rep = BoundCheckReport::new("two_sided_tail", &TAIL_COLUMNS);
    let in_hypothesis = spec.thresholds().is_some();
    if let Some(th) = spec.thresholds() {
        if th.lambda_u > 0.0 {
            let m = spec.fit_levy_m(spec.levy_m_window())?.unwrap_or(0.0);
            let bad: Vec<String> = grid
                .pairs
                .iter()
                .filter(|(_, r)| !(*r < m / th.lambda_u))
                .map(|(t, r)| format!("t={t}, r={r}"))
                .collect();
            if !bad.is_empty() {
                return Err(Error::precondition(
                    format!("grid points violate r < M/λ_U = {}", m / th.lambda_u),
                    bad,
                ));
            }
            rep.constant("M", m);
        }
    } else {
        rep.note(format!(
            "{} is outside the hypotheses (no scaling of H with index below 2); reported for contrast",
            spec.name()
        ));
    }
    let slices = TimeSlices::build(spec, grid)?;
    slices.annotate(&mut rep);
    let mut mc = Vec::new();
    for &(t, r) in &grid.pairs {
        let (law, draws) = slices.get(t);
        let lhs = t * spec.phi(1.0 / r)?;
        let p = law.tail_prob(r);
        let th = t * spec.h(1.0 / r)?;
        let (pm, se) = empirical_tail(draws, r);
        mc.push((p, pm, se));
        rep.push(vec![t, r, lhs, p, th, p / th, se]);
    }
    let ratios = rep.column("ratio").unwrap();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lt: Vec<f64> = grid.pairs.iter().map(|p| p.0.ln()).collect();
    let lr: Vec<f64> = grid.pairs.iter().map(|p| p.1.ln()).collect();
    let ly: Vec<f64> = ratios.iter().map(|v| v.ln()).collect();
    let (st, sr) = slopes2(&lt, &lr, &ly);
    rep.set_worst(argmax(&ratios.iter().map(|v| (v / lo).max(hi / v)).collect::<Vec<_>>()).unwrap());
    rep.constant("c1", lo);
    rep.constant("c2", hi);
    rep.constant("spread", hi / lo);
    rep.constant("slope_log_t", st);
    rep.constant("slope_log_r", sr);
    rep.constant("in_hypothesis", if in_hypothesis { 1.0 } else { 0.0 });
    let off = mc_disagreements(&mc);
    if off > 0 {
        rep.note(format!("{off} points where Monte Carlo and inversion tails differ by > 5 stderr"));
    }
    rep.pass = hi / lo <= 1e3 && st.abs() <= 0.2 && sr.abs() <= 0.2;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::erf;

    fn half_stable_density(t: f64, s: f64) -> f64 {
        t * s.powf(-1.5) * (-t * t / (4.0 * s)).exp() / (2.0 * std::f64::consts::PI.sqrt())
    }

    #[test]
    fn half_stable_density_and_tail() {
        let spec = LaplaceExponentSpec::stable(1.0).unwrap();
        let law = SubordinatorLaw::new(&spec, 1.0).unwrap();
        for s in logspace(0.05, 50.0, 40) {
            let got = law.density(s);
            let want = half_stable_density(1.0, s);
            assert!((got / want - 1.0).abs() < 1e-4, "s={s}: {got} vs {want}");
        }
        assert!((law.tail_prob(1.0) - erf(0.5)).abs() < 1e-6);
        assert!(law.cdf(law.support_hint().1) >= 1.0 - 1e-4);
        assert!((law.tail_prob(1e-12) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn pure_drift_is_a_point_mass() {
        let spec = LaplaceExponentSpec::pure_drift(2.0).unwrap();
        let law = SubordinatorLaw::new(&spec, 3.0).unwrap();
        assert_eq!(law.cdf(5.99), 0.0);
        assert_eq!(law.cdf(6.01), 1.0);
        assert!(law.sample(10, 1).unwrap().iter().all(|&s| s == 6.0));
    }

    #[test]
    fn drifted_spec_is_rejected() {
        let spec = LaplaceExponentSpec::new(crate::Family::Stable { alpha: 1.0 }, 0.5).unwrap();
        assert!(matches!(SubordinatorLaw::new(&spec, 1.0), Err(Error::Precondition { .. })));
    }

    #[test]
    fn explicit_tau_value() {
        let tau = explicit_interval_tau(0.05);
        let want = 1.0 - (1.0 - (-0.05f64).exp()) / (1.0 - (-1.0f64).exp()) - (-0.5f64).exp();
        assert!((tau - want).abs() < 1e-15);
        assert!(tau > 0.3 && tau < 0.33);
    }
}
