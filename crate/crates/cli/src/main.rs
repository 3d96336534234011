use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpgeom::constructions::{ConstructionParams, DEFAULT_PATCH_RADIUS};
use lpgeom::solver::SolveConfig;
use lpgeom_cli::commands::{cmd_construct, cmd_measure, cmd_solve, cmd_spectrum};
use lpgeom_cli::io::write_json;
use lpgeom_cli::{run_experiment, CliError, CliResult, ExperimentConfig, ExperimentName};

#[derive(Parser)]
#[command(name = "lpgeom", version, about = "L_p surface-area measures, Minkowski solver and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute S_p of a polytope given as JSON.
    Measure {
        body: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        p: f64,
        /// Write the measure JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the discrete L_p Minkowski problem for a measure JSON.
    Solve {
        measure: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        /// Starting body; its support values give the initial offsets.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value_t = SolveConfig::default().tol)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = SolveConfig::default().max_iter)]
        max_iter: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a named experiment.
    Experiment(ExperimentArgs),
    /// Tabulate the subspace-concentrated construction's density near o.
    Construct {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_PATCH_RADIUS)]
        r: f64,
        #[arg(long, default_value = "construction.csv")]
        out: PathBuf,
    },
    /// Eigenvalues of the linearized operator on a sphere grid.
    Spectrum {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value = "spectrum.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// roundtrip, stability, nonuniqueness, construction-limit, spectrum or identities.
    name: String,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Extra parameters such as `eps=0.05` or `stretches=1,2,4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ExperimentArgs {
    fn config(&self) -> CliResult<ExperimentConfig> {
        let name: ExperimentName = self.name.parse()?;
        let mut params = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                params.insert(k.to_string(), v);
            }
        };
        put("p", self.p.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("level", self.level.map(|v| v.to_string()));
        put("seed", Some(self.seed.to_string()));
        put("tol", self.tol.map(|v| v.to_string()));
        put("max-iter", self.max_iter.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got '{kv}'")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        ExperimentConfig::new(name, params, self.out.clone())
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Measure { body, p, out } => {
            let (mu, s) = cmd_measure(&body, p)?;
            eprintln!(
                "atoms {}  total mass {}  barycenter norm {:e}  min atom {}  max atom {}",
                s.atoms, s.total_mass, s.barycenter_norm, s.min_atom, s.max_atom
            );
            match out {
                Some(path) => write_json(&path, &mu)?,
                None => println!("{}", serde_json::to_string_pretty(&mu).map_err(|e| CliError::Config(e.to_string()))?),
            }
            Ok(0)
        }
        Command::Solve {
            measure,
            p,
            init,
            tol,
            max_iter,
            out,
        } => {
            let config = SolveConfig {
                tol,
                max_iter,
                ..SolveConfig::default()
            };
            let report = cmd_solve(&measure, p, init.as_deref(), &config, &out)?;
            eprintln!(
                "iterations {}  converged {}  residual {:e}  flags {:?}",
                report.iterations, report.converged, report.final_residual, report.degeneracy_flags
            );
            Ok(report.exit_code() as u8)
        }
        Command::Experiment(args) => {
            let verdict = run_experiment(&args.config()?)?;
            for p in &verdict.properties {
                let tag = if p.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: measured {:.4e} (threshold {:.4e})", p.property, p.measured, p.threshold);
            }
            Ok(if verdict.passed { 0 } else { 1 })
        }
        Command::Construct { n, m, p, r, out } => {
            let params = ConstructionParams::new(n, m, p, r)?;
            for row in cmd_construct(&params, &out)? {
                println!("|z| = {:e}  phi = {}  limit = {}  ratio = {}", row[0], row[1], row[2], row[3]);
            }
            Ok(0)
        }
        Command::Spectrum {
            n,
            p,
            level,
            count,
            out,
        } => {
            let s = cmd_spectrum(n, p, level, count, &out)?;
            println!("min |eigenvalue| {} (analytic {})", s.min_abs, s.expected_min_abs);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
