use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sbm_lab::config::{load_config, Command, Overrides};
use sbm_lab::run::{execute, EXIT_CONFIG};

const COLUMNS: &str = "\
Artifacts (written to --out; every CSV starts with a header row):
  phi_table.csv   lambda, phi, phi_prime, phi_second: the exponent and its first two
                  derivatives; H = phi - lambda*phi_prime; H_over_phi
  scaling.csv     lambda, phi, H, H_over_phi, lambda_phi_prime_over_phi,
                  H_over_lambda2_second = H / (lambda^2 * (-phi''))
  tails_upper.csv, tails_two_sided.csv
                  t, r, regime_lhs = t*phi(1/r), tail_prob = P(S_t >= r), tH = t*H(1/r),
                  ratio = tail_prob / tH, stderr = Monte Carlo standard error (NaN if none)
  tails_lower.csv t, r, tail_prob, lower_bound = 1 - exp(-t*mu(r,inf)),
                  ratio = tail_prob / lower_bound, stderr
  tails_interval.csv
                  t, r, L, interval_prob = P(r <= S_t <= L*r), tH, ratio = interval_prob / tH,
                  stderr
  kernel.csv, verify.csv
                  t, r, d, regime (near_diagonal | off_diagonal), p_fourier (Fourier
                  inversion, NaN if d > 3), p_subord (subordination estimate),
                  p_stderr (Monte Carlo standard error, NaN for quadrature), env_lower,
                  env_upper (envelope sides), ratio_lo = p/env_lower, ratio_hi = p/env_upper
  green.csv       r, d, G (Green function), envelope = 1/(r^d phi(r^-2)),
                  refined_envelope (r^(2-d) log(1/r) for conjugate_gamma, d >= 3; else NaN),
                  ratio = G/envelope
  blowup.csv      r, p = p(1, r), normalized = p * r^(d - beta)
  calibration.json   C, a_L, a_U, grid, pass, worst_point (verify)
  invariants.json    invariant suite results (verify --all)
  <command>.json     resolved configuration, verdict and fitted constants
  diagnostic.json    error details when the run fails with exit code 2 or 3

Exit codes: 0 all gated checks pass, 1 a bound check fails, 2 numeric error,
3 configuration or precondition error.";

/// Numerical laboratory for subordinate Brownian motion.
#[derive(Parser, Debug)]
#[command(name = "sbm-lab", version, after_long_help = COLUMNS)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default "out")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spatial dimension
    #[arg(long)]
    d: Option<usize>,
    /// With verify: also run the invariant suites
    #[arg(long)]
    all: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let flags = Overrides {
        command: Some(cli.command),
        d: cli.d,
        seed: cli.seed,
        out: cli.out,
    };
    let cfg = match load_config(&cli.config, &flags) {
        Ok(c) => c,
        Err(e) => {
            let diag = sbm_lab::RunError::from(e).diagnostic();
            eprintln!("{}", serde_json::to_string_pretty(&diag).unwrap());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let (code, report) = execute(&cfg, cli.all);
    let text = serde_json::to_string_pretty(&report).unwrap();
    if code >= 2 {
        eprintln!("{text}");
    } else {
        println!("{text}");
    }
    ExitCode::from(code as u8)
}
