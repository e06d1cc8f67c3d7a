//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime
//! against the budget. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use sbm_core::green::{green_numeric, verify_green};
use sbm_core::grid::logspace;
use sbm_core::heatkernel::{
    blowup_probe, mc_average, p_fourier, p_subordinate_with, regime_of, verify_main_theorem,
    verify_near_diagonal, EnvelopeConfig, KernelGrid, Regime, SubordMode,
};
use sbm_core::special::erf;
use sbm_core::subordinator::{check_two_sided, TailCheckGrid};
use sbm_core::{LaplaceExponentSpec, SubordinatorLaw};

type Outcome = Result<(bool, String), String>;
type Criterion = fn() -> Outcome;

fn stable(alpha: f64) -> LaplaceExponentSpec {
    LaplaceExponentSpec::stable(alpha).unwrap()
}

fn conj_geom(beta: f64) -> LaplaceExponentSpec {
    LaplaceExponentSpec::conjugate_geometric(beta).unwrap()
}

fn cauchy(t: f64, r: f64) -> f64 {
    t / (PI * (t * t + r * r))
}

fn rel(got: f64, want: f64) -> f64 {
    (got / want - 1.0).abs()
}

fn criterion_1() -> Outcome {
    let spec = stable(1.0);
    let ts = logspace(1e-3, 1.0, 12);
    let mut rs = vec![0.0];
    rs.extend(logspace(1e-2, 10.0, 11));
    let n = 200_000;
    let (mut fourier, mut quad, mut worst_z) = (0.0f64, 0.0f64, 0.0f64);
    let mut outside = 0;
    for (i, &t) in ts.iter().enumerate() {
        let pointwise = SubordinatorLaw::pointwise(&spec, t).map_err(|e| e.to_string())?;
        let law = SubordinatorLaw::new(&spec, t).map_err(|e| e.to_string())?;
        let draws = law.sample_stream(n, 7, i as u64).map_err(|e| e.to_string())?;
        for &r in &rs {
            let exact = cauchy(t, r);
            fourier = fourier.max(rel(p_fourier(&spec, t, r, 1).map_err(|e| e.to_string())?, exact));
            let q = p_subordinate_with(&pointwise, r, 1, SubordMode::Quadrature).map_err(|e| e.to_string())?;
            quad = quad.max(rel(q.value, exact));
            let mc = mc_average(&draws, r, 1);
            let z = (mc.value - exact).abs() / mc.stderr.unwrap();
            worst_z = worst_z.max(z);
            if z > 3.0 {
                outside += 1;
            }
        }
    }
    Ok((
        fourier <= 1e-6 && quad <= 1e-3 && outside == 0,
        format!(
            "fourier max rel {fourier:.2e} (<= 1e-6); quadrature max rel {quad:.2e} (<= 1e-3); \
             MC n=2e5 worst {worst_z:.2} stderr, {outside}/144 beyond 3"
        ),
    ))
}

fn criterion_2() -> Outcome {
    let law = SubordinatorLaw::new(&stable(1.0), 1.0).map_err(|e| e.to_string())?;
    let lo = law.quantile(0.005).map_err(|e| e.to_string())?;
    let hi = law.quantile(0.995).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in logspace(lo, hi, 400) {
        let want = s.powf(-1.5) * (-1.0 / (4.0 * s)).exp() / (2.0 * PI.sqrt());
        worst = worst.max(rel(law.density(s), want));
    }
    let tail = (law.tail_prob(1.0) - erf(0.5)).abs();
    Ok((
        worst <= 1e-4 && tail <= 1e-3,
        format!("density max rel {worst:.2e} on [{lo:.3e}, {hi:.3e}] (<= 1e-4); |P(S_1>=1) - erf(1/2)| {tail:.2e} (<= 1e-3)"),
    ))
}

fn criterion_3() -> Outcome {
    let ts = logspace(1e-3, 1e-1, 5);
    let rs = logspace(1.0, 1e3, 7);
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in [stable(0.6), stable(1.0), stable(1.4), conj_geom(1.0)] {
        let grid = TailCheckGrid::product(&spec, &ts, &rs, 0.5, 10_000, 11).map_err(|e| e.to_string())?;
        let rep = check_two_sided(&spec, &grid).map_err(|e| e.to_string())?;
        let (spread, st, sr) = (
            rep.get("spread").unwrap(),
            rep.get("slope_log_t").unwrap(),
            rep.get("slope_log_r").unwrap(),
        );
        let ok = spread <= 1e3 && st.abs() <= 0.2 && sr.abs() <= 0.2;
        pass &= ok;
        parts.push(format!(
            "{} spread {spread:.3} slopes ({st:.3}, {sr:.3}) {}",
            spec.name(),
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn criterion_4() -> Outcome {
    let cfg = EnvelopeConfig::default();
    let cases = [
        (stable(1.0), 1, KernelGrid::log((1e-3, 1.0), 12, (1e-2, 10.0), 12)),
        (stable(1.0), 3, KernelGrid::log((1e-3, 1.0), 12, (1e-2, 10.0), 12)),
        (conj_geom(1.0), 1, KernelGrid::log((1e-3, 1e-1), 12, (1e-2, 1e-1), 12)),
        (conj_geom(1.0), 3, KernelGrid::log((1e-3, 1e-1), 12, (1e-2, 1e-1), 12)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, d, grid) in cases {
        let rep = verify_main_theorem(&spec, &grid, d, &cfg).map_err(|e| e.to_string())?;
        pass &= rep.pass;
        let g = |k: &str| rep.get(k).unwrap_or(f64::NAN);
        let mut line = format!(
            "{} d={d} C {:.3} a_L {:.3} a_U {:.3} slopes ({:.3}, {:.3})",
            spec.name(),
            g("C"),
            g("a_L"),
            g("a_U"),
            g("slope_log_t"),
            g("slope_log_r")
        );
        if rep.get("C_explicit").is_some() {
            line += &format!(
                " explicit C {:.3} slopes ({:.3}, {:.3}) C_common {:.3}",
                g("C_explicit"),
                g("slope_log_t_explicit"),
                g("slope_log_r_explicit"),
                g("C_common")
            );
        }
        line += if rep.pass { " ok" } else { " FAIL" };
        parts.push(line);
    }
    Ok((pass, parts.join("; ")))
}

fn criterion_5() -> Outcome {
    let catalog = [
        stable(0.6),
        stable(1.0),
        stable(1.7),
        conj_geom(0.5),
        conj_geom(1.0),
        LaplaceExponentSpec::conjugate_gamma(),
        LaplaceExponentSpec::geometric_stable(1.0).unwrap(),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in catalog.iter().filter(|s| s.phi_has_lower_scaling()) {
        let mut pts = Vec::new();
        for t in logspace(1e-3, 1.0, 6) {
            let len = spec.phi_inverse(1.0 / t).map_err(|e| e.to_string())?.powf(-0.5);
            for f in [0.0, 0.1, 0.5, 0.99] {
                let r = f * len;
                if regime_of(spec, t, r).map_err(|e| e.to_string())?.0 == Regime::NearDiagonal {
                    pts.push((t, r));
                }
            }
        }
        for d in [1, 3] {
            let rep = verify_near_diagonal(spec, &pts, d).map_err(|e| e.to_string())?;
            pass &= rep.pass;
            if !rep.pass {
                parts.push(format!("{} d={d} spread {:.1} FAIL", spec.name(), rep.get("spread").unwrap()));
            } else {
                parts.push(format!("{} d={d} spread {:.2}", spec.name(), rep.get("spread").unwrap()));
            }
        }
    }
    let geo = LaplaceExponentSpec::geometric_stable(1.0).unwrap();
    let rep = blowup_probe(&geo, 3, &[0.2, 0.1, 0.05, 0.025]).map_err(|e| e.to_string())?;
    let norm = rep.column("normalized").unwrap();
    pass &= rep.pass;
    parts.push(format!(
        "blowup geometric_stable(beta=1) d=3 p(1,r)r^2 = {:?} {}",
        norm.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
        if rep.pass { "ok" } else { "FAIL" }
    ));
    Ok((pass, parts.join("; ")))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let c = stable(1.0).comparability((1e-4, 1e6)).map_err(|e| e.to_string())?;
    let dev = (c.h_over_phi.inf - 0.5).abs().max((c.h_over_phi.sup - 0.5).abs());
    pass &= dev <= 1e-12;
    parts.push(format!("stable(1) |H/phi - 0.5| {dev:.1e}"));

    let g = LaplaceExponentSpec::conjugate_gamma();
    let c = g.comparability((1e2, 1e8)).map_err(|e| e.to_string())?;
    let ok = !c.h_phi_comparable() && c.h_over_phi_trend < 0.0 && c.h_over_phi.inf < 0.1;
    pass &= ok;
    parts.push(format!(
        "conjugate_gamma inf H/phi {:.4} trend {:.3} comparable {}",
        c.h_over_phi.inf,
        c.h_over_phi_trend,
        c.h_phi_comparable()
    ));

    // λ²(−φ″)/H in [0.3, 1] on windows where the lower scaling holds
    let windows = [
        (stable(0.6), (1e-4, 1e6)),
        (stable(1.0), (1e-4, 1e6)),
        (stable(1.4), (1e-4, 1e6)),
        (conj_geom(0.5), (1e-4, 1e6)),
        (conj_geom(1.0), (1e-4, 1e6)),
        (LaplaceExponentSpec::conjugate_gamma(), (1e2, 1e8)),
    ];
    let slack = 1e-12;
    for (spec, w) in windows {
        let r = spec
            .comparability(w)
            .map_err(|e| e.to_string())?
            .h_over_lambda2_second
            .ok_or("phi'' vanishes")?;
        let (lo, hi) = (1.0 / r.sup, 1.0 / r.inf);
        let ok = lo >= 0.3 * (1.0 - slack) && hi <= 1.0 + slack;
        pass &= ok;
        parts.push(format!("{} l2(-phi'')/H in [{lo:.3}, {hi:.3}]{}", spec.name(), if ok { "" } else { " FAIL" }));
    }
    // ½λ²(−φ″) ≤ H everywhere
    for spec in [
        stable(0.6),
        stable(1.7),
        LaplaceExponentSpec::geometric_stable(1.0).unwrap(),
        conj_geom(1.0),
        LaplaceExponentSpec::conjugate_gamma(),
    ] {
        let r = spec
            .comparability((1e-6, 1e8))
            .map_err(|e| e.to_string())?
            .h_over_lambda2_second
            .ok_or("phi'' vanishes")?;
        if r.inf < 0.5 * (1.0 - 1e-9) {
            pass = false;
            parts.push(format!("{} H/(l2(-phi'')) dips to {:.4} FAIL", spec.name(), r.inf));
        }
    }
    Ok((pass, parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let spec = stable(1.0);
    let mut worst: f64 = 0.0;
    for r in logspace(1e-3, 1.0, 7) {
        let g = green_numeric(&spec, r, 3).map_err(|e| e.to_string())?;
        worst = worst.max(rel(g.g, 1.0 / (2.0 * PI * PI * r * r)));
    }
    let rep = verify_green(&LaplaceExponentSpec::conjugate_gamma(), &logspace(1e-3, 1e-1, 9), 3)
        .map_err(|e| e.to_string())?;
    let flat = rep.get("refined_spread").unwrap();
    let power = rep.get("newtonian_log_power").unwrap();
    Ok((
        worst <= 1e-2 && rep.pass,
        format!(
            "stable(1) d=3 max rel vs 1/(2 pi^2 r^2) {worst:.2e} (<= 1e-2); conjugate_gamma d=3 \
             G r/log(1/r) spread {flat:.3} (<= 2), G r growth ~ log(1/r)^{power:.3}"
        ),
    ))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"spec": {"family": "stable", "alpha": 1.0}, "seed": 1}"#).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_sbm-lab"))
        .args(["verify", "--all", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(out.join("invariants.json")).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let results = v["results"].as_array().ok_or("no results")?;
    let failed: Vec<String> = results
        .iter()
        .filter(|r| r["pass"] != true)
        .map(|r| format!("{} ({})", r["name"], r["worst"]))
        .collect();
    let code = status.status.code().unwrap_or(-1);
    Ok((
        code == 0 && failed.is_empty() && results.len() >= 8,
        format!(
            "verify --all exit {code}; {} invariants, failing: {}",
            results.len(),
            if failed.is_empty() { "none".into() } else { failed.join(", ") }
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, f64, Criterion); 8] = [
        (1, 30.0, criterion_1),
        (2, 5.0, criterion_2),
        (3, 60.0, criterion_3),
        (4, 300.0, criterion_4),
        (5, 60.0, criterion_5),
        (6, 60.0, criterion_6),
        (7, 180.0, criterion_7),
        (8, 600.0, criterion_8),
    ];
    let mut all = true;
    for (id, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs <= budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!(
            "criterion {id}: {} [{secs:.1}s / {budget:.0}s] {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
