//! `robustlab`: robust no-arbitrage checks, martingale measures and robust
//! utility maximisation on scenario-tree markets.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robustlab_core::{AdmissibilityMode, Error, UtilitySpec};

#[derive(Parser, Debug)]
#[command(name = "robustlab", version, about)]
pub struct Cli {
    /// Market file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub market: Option<PathBuf>,
    /// Numerical tolerance for verdicts that compare against zero.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for every randomised computation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classical no-arbitrage check for every model.
    CheckNa,
    /// Robust no-arbitrage across the whole family.
    RobustNa,
    /// Per-node (beta, kappa) certificates.
    Certificates {
        #[arg(long)]
        model: Option<String>,
    },
    /// Equivalent martingale measures.
    Emm {
        #[arg(long)]
        model: Option<String>,
    },
    /// Per-node bounds on projected strategies of admissible portfolios.
    Bounds {
        /// Defaults to the first reference model.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        w0: f64,
    },
    /// Robust utility maximisation.
    Optimize(OptimizeArgs),
    /// Robust value of a given strategy.
    Evaluate {
        #[arg(long)]
        utility: UtilitySpec,
        #[arg(long, default_value_t = 1.0)]
        w0: f64,
        /// Positions per period, periods separated by `;` and assets by `,`
        /// (for example `1;1` or `0.5,0;1,-1`).
        #[arg(long, allow_hyphen_values = true)]
        strategy: String,
    },
    /// Write a built-in example market.
    Example {
        #[command(subcommand)]
        which: ExampleKind,
        /// Output file; standard output when omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Time-consistency of the two-period price-path laws of the models.
    TimeConsistency,
    /// Which hypothesis sets of the existence results hold.
    Hypotheses {
        #[arg(long)]
        utility: UtilitySpec,
        #[arg(long, default_value_t = 1.0)]
        w0: f64,
        #[arg(long, default_value = "intermediate")]
        mode: AdmissibilityMode,
    },
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Utility, e.g. `pl:0:0,1:1,4:2`, `log`, `capped_sqrt:cap=2`.
    #[arg(long)]
    pub utility: UtilitySpec,
    #[arg(long, default_value_t = 1.0)]
    pub w0: f64,
    #[arg(long, default_value = "intermediate")]
    pub mode: AdmissibilityMode,
    #[arg(long, value_enum, default_value_t = MethodArg::Lp)]
    pub method: MethodArg,
    /// Supergradient iterations.
    #[arg(long, default_value_t = 4000)]
    pub iters: usize,
    /// Bound on |φ| in unconstrained mode.
    #[arg(long = "box", default_value_t = 1e4)]
    pub box_bound: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Lp,
    Supergradient,
}

#[derive(Subcommand, Debug)]
pub enum ExampleKind {
    /// One step, ±1 with probability 1/2.
    Coin,
    /// Binomial random walks `s0 + Σ (σ ε + μ)`.
    Bachelier {
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        s0: f64,
        /// `sigma:mu`, repeatable.
        #[arg(long = "theta", default_value = "1:0", allow_hyphen_values = true)]
        thetas: Vec<String>,
    },
    /// Three-model family where intermediate and terminal admissibility differ.
    Remark {
        #[arg(long, default_value_t = 100.0)]
        m: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Two drifts on a two-period coin-flip tree.
    TwoDrift,
}

/// Exit status for library errors: 1 when the error is itself a failed
/// no-arbitrage verdict, 3 for solver failures, 2 for bad input.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ArbitrageAtNode { .. } | Error::ArbitrageInModel(_) | Error::ArbitrageInStockModel(_) => 1,
        Error::Numeric(_) | Error::Unbounded | Error::Infeasible => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("JSON values serialise"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(if report.verdict { 0 } else { 1 })
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::ArbitrageInModel("s".into())), 1);
        assert_eq!(exit_code(&Error::Numeric("x".into())), 3);
        assert_eq!(exit_code(&Error::Io("x".into())), 2);
    }

    #[test]
    fn global_flags_and_defaults() {
        let cli = Cli::try_parse_from(["robustlab", "optimize", "--utility", "log", "--market", "m.json"]).unwrap();
        assert_eq!(cli.tol, 1e-9);
        assert_eq!(cli.seed, 0);
        let Command::Optimize(args) = cli.command else { panic!("optimize expected") };
        assert_eq!(args.mode, AdmissibilityMode::Intermediate);
        assert_eq!(args.method, MethodArg::Lp);
        assert_eq!(args.iters, 4000);
    }
}
