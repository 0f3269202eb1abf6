use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use blindgossip::harness::{
    load_config, render_sweep, run_resolved, sweep, Backend, Experiment, ExperimentConfig, Resolved, SpectralReport,
};
use blindgossip::par::Execution;
use blindgossip::rng::SeedTree;
use blindgossip::simnet::{Fault, TopologySpec, Verify};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "blindgossip", version, about = "Masked gossip consensus experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a config and echo it in normalized form.
    Check(Common),
    /// Run the simulation; writes trace.csv and audit.txt.
    Run(Common),
    /// Compare every unmasked state with the plaintext oracle, step by step.
    OracleDiff(Common),
    /// Second eigenvalue and averaging times for the topology; writes spectral.txt.
    Spectral(SpectralArgs),
    /// Run and print the cost audit; writes audit.txt.
    Audit(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// `pairing` or `test`; overrides the config.
    #[arg(long)]
    backend: Option<Backend>,
    /// Run N independently seeded copies and summarize them in sweep.csv.
    #[arg(long, value_name = "N")]
    sweep_seeds: Option<u64>,
    /// Perturb one stored numerator: `STEP:AGENT`.
    #[arg(long, value_name = "STEP:AGENT", value_parser = parse_fault)]
    inject_fault: Option<Fault>,
    /// Count documented deviations in the audit as failures.
    #[arg(long)]
    strict: bool,
    /// Run without the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    #[arg(long, required_unless_present = "topology", conflicts_with = "topology")]
    config: Option<PathBuf>,
    /// Topology preset, e.g. `ring:8`.
    #[arg(long)]
    topology: Option<TopologySpec>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    let (step, agent) = s.split_once(':').ok_or("expected STEP:AGENT")?;
    Ok(Fault {
        step: step.parse().map_err(|e| format!("step: {e}"))?,
        agent: agent.parse().map_err(|e| format!("agent: {e}"))?,
    })
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = load_config(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(b) = self.backend {
            cfg.backend = b;
            cfg.validate()?;
        }
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::available()
        }
    }

    fn resolve(&self, cfg: &ExperimentConfig, verify: Verify) -> Result<Resolved> {
        let mut r = cfg.resolve(self.execution())?;
        r.sim.verify = verify;
        r.sim.fault = self.inject_fault;
        Ok(r)
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn summary(e: &Experiment, strict: bool) {
    let t = &e.trace;
    println!("agents {}, steps {}, seed {}", t.n, t.steps.len(), t.seed);
    println!("true mean {:.6}, normalized error {:.3e}", t.true_mean, t.normalized_error);
    print!("{}", e.diff.render());
    let a = &e.audit;
    let fails = a.failures().count();
    println!("audit: {} rows, {} failed, all-pass {}", a.rows.len(), fails, a.all_pass(strict));
}

fn run_sweep(args: &Common, cfg: &ExperimentConfig, n: u64) -> Result<ExitCode> {
    if args.inject_fault.is_some() {
        bail!("--inject-fault applies to single runs only");
    }
    let runs = sweep(cfg, n, args.execution())?;
    let text = render_sweep(&runs, args.strict);
    write(&args.out_dir, "sweep.csv", &text)?;
    print!("{text}");
    Ok(status(runs.iter().all(|e| e.passed(args.strict))))
}

fn cmd_run(args: &Common) -> Result<ExitCode> {
    let cfg = args.config()?;
    if let Some(n) = args.sweep_seeds {
        return run_sweep(args, &cfg, n);
    }
    let e = run_resolved(&args.resolve(&cfg, Verify::Participants)?)?;
    write(&args.out_dir, "trace.csv", &e.trace.to_csv())?;
    write(&args.out_dir, "audit.txt", &e.audit.render())?;
    summary(&e, args.strict);
    Ok(status(e.passed(args.strict)))
}

fn cmd_oracle_diff(args: &Common) -> Result<ExitCode> {
    let cfg = args.config()?;
    if cfg.backend != Backend::Test {
        bail!("oracle-diff needs the test backend");
    }
    if let Some(n) = args.sweep_seeds {
        return run_sweep(args, &cfg, n);
    }
    let e = run_resolved(&args.resolve(&cfg, Verify::Full)?)?;
    let text = e.diff.render();
    write(&args.out_dir, "oracle-diff.txt", &text)?;
    print!("{text}");
    Ok(status(e.diff.is_empty()))
}

fn cmd_audit(args: &Common) -> Result<ExitCode> {
    let cfg = args.config()?;
    if let Some(n) = args.sweep_seeds {
        return run_sweep(args, &cfg, n);
    }
    let e = run_resolved(&args.resolve(&cfg, Verify::Participants)?)?;
    let text = e.audit.render();
    write(&args.out_dir, "audit.txt", &text)?;
    print!("{text}");
    Ok(status(e.audit.all_pass(args.strict)))
}

fn cmd_spectral(args: &SpectralArgs) -> Result<ExitCode> {
    let (spec, seed) = match (&args.config, &args.topology) {
        (Some(path), _) => {
            let cfg = load_config(path)?;
            (cfg.topology, args.seed.unwrap_or(cfg.seed))
        }
        (None, Some(t)) => (t.clone(), args.seed.unwrap_or(0)),
        (None, None) => bail!("--config or --topology is required"),
    };
    // Same derivation as a run, so geometric graphs match.
    let topology = spec.build(&mut SeedTree::new(seed).rng("topology", 0))?;
    let report = SpectralReport::for_topology(&topology)?;
    let text = report.render();
    write(&args.out_dir, "spectral.txt", &text)?;
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => args.config().map(|cfg| {
            print!("{}", cfg.to_toml());
            ExitCode::SUCCESS
        }),
        Command::Run(args) => cmd_run(args),
        Command::OracleDiff(args) => cmd_oracle_diff(args),
        Command::Spectral(args) => cmd_spectral(args),
        Command::Audit(args) => cmd_audit(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
