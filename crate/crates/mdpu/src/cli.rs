//! The `mdpu` binary: `validate`, `run`, `demo`, and `theory`
//! subcommands. Exit codes: 0 success, 1 validation or usage error,
//! 2 runtime fault. Every failure prints a single line starting with
//! `error:` to stderr. `MDPU_LOG=info|debug` turns on stderr logging.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bounds::{
    impossibility_gap, k0, k0_upper_bound_check, k1_rmax, k1_urmax, k2_k3, lower_bound_steps,
    GrowthBound,
};
use crate::discovery::DiscoveryFamily;
use crate::harness::{
    demo_csv, demo_example1, run_experiment, Algo, ExperimentPlan, HarnessError, DEFAULT_MAX_STEPS,
};
use crate::model::validate_mdpu;
use crate::scenario::load_scenario;

#[derive(Parser)]
#[command(
    name = "mdpu",
    version,
    about = "Learn Markov decision processes with unawareness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Check a scenario file against the schema and model invariants.
    Validate { file: PathBuf },
    /// Sweep a learner over a seed range and write traces and summaries.
    Run(RunArgs),
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
    /// Bound and threshold calculators.
    Theory {
        #[command(subcommand)]
        which: TheoryCommand,
    },
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    s.parse()
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B (half-open), got {s:?}"))?;
    let start: u64 = a
        .parse()
        .map_err(|_| format!("bad seed range start {a:?}"))?;
    let end: u64 = b.parse().map_err(|_| format!("bad seed range end {b:?}"))?;
    if start >= end {
        return Err(format!("seed range {start}..{end} is empty"));
    }
    Ok((start, end))
}

#[derive(Args)]
pub struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// rmax, urmax-inner, or urmax-outer.
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algo,
    /// Half-open seed range A..B.
    #[arg(long, value_parser = parse_seed_range)]
    pub seeds: (u64, u64),
    /// Explore play threshold override.
    #[arg(long = "override-k0")]
    pub override_k0: Option<u64>,
    /// Visit threshold override.
    #[arg(long = "override-k1")]
    pub override_k1: Option<u64>,
    /// Evaluation replay length override.
    #[arg(long = "override-replay")]
    pub override_replay: Option<u64>,
    /// Env-step budget for the learning phase.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,
    /// Count explore-phase rewards in avg_reward.
    #[arg(long)]
    pub include_explore_rewards: bool,
    /// Compute the planning oracle value and per-seed regret.
    #[arg(long)]
    pub oracle: bool,
    /// Output directory for traces and summaries.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum DemoCommand {
    /// Empirical vs closed-form non-discovery for the power(2) law.
    Example1 {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        /// Output directory for the CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Discovery family selection shared by the theory subcommands.
#[derive(Args)]
pub struct FamilyArgs {
    /// constant, power, harmonic_j, log_harmonic, or table.
    #[arg(long)]
    pub family: String,
    /// Constant family probability.
    #[arg(long)]
    pub c: Option<f64>,
    /// Power family exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// log_harmonic family scale.
    #[arg(long)]
    pub m1: Option<f64>,
    /// Table family probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

fn resolve_family(
    family: &str,
    c: Option<f64>,
    alpha: Option<f64>,
    m1: Option<f64>,
    values: Option<&[f64]>,
    flag_prefix: &str,
) -> Result<DiscoveryFamily, String> {
    let mut uses_c = false;
    let mut uses_alpha = false;
    let mut uses_m1 = false;
    let mut uses_values = false;
    let requires = |flag: &str| format!("family {family} requires --{flag_prefix}{flag}");
    let fam = match family {
        "constant" => {
            uses_c = true;
            DiscoveryFamily::Constant { c: c.ok_or_else(|| requires("c"))? }
        }
        "power" => {
            uses_alpha = true;
            DiscoveryFamily::Power { alpha: alpha.ok_or_else(|| requires("alpha"))? }
        }
        "harmonic_j" => DiscoveryFamily::HarmonicJ,
        "log_harmonic" => {
            uses_m1 = true;
            DiscoveryFamily::LogHarmonic { m1: m1.ok_or_else(|| requires("m1"))? }
        }
        "table" => {
            uses_values = true;
            DiscoveryFamily::Table { values: values.ok_or_else(|| requires("values"))?.to_vec() }
        }
        other => {
            return Err(format!(
                "unknown discovery family {other:?} (expected constant, power, harmonic_j, log_harmonic, or table)"
            ))
        }
    };
    for (given, used, flag) in [
        (c.is_some(), uses_c, "c"),
        (alpha.is_some(), uses_alpha, "alpha"),
        (m1.is_some(), uses_m1, "m1"),
        (values.is_some(), uses_values, "values"),
    ] {
        if given && !used {
            return Err(format!(
                "--{flag_prefix}{flag} is not used by family {family}"
            ));
        }
    }
    let report = fam.validate();
    if !report.is_valid() {
        return Err(one_line(&report.to_string()));
    }
    Ok(fam)
}

impl FamilyArgs {
    pub fn resolve(&self) -> Result<DiscoveryFamily, String> {
        resolve_family(
            &self.family,
            self.c,
            self.alpha,
            self.m1,
            self.values.as_deref(),
            "",
        )
    }

    fn echo(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("family".into(), json!(self.family));
        if let Some(c) = self.c {
            map.insert("c".into(), json!(c));
        }
        if let Some(alpha) = self.alpha {
            map.insert("alpha".into(), json!(alpha));
        }
        if let Some(m1) = self.m1 {
            map.insert("m1".into(), json!(m1));
        }
        if let Some(values) = &self.values {
            map.insert("values".into(), json!(values));
        }
        serde_json::Value::Object(map)
    }
}

#[derive(Subcommand)]
pub enum TheoryCommand {
    /// Explore play threshold K0: partial sums crossing ln(4N/delta).
    K0 {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Visit threshold K1 for the chosen learner variant.
    K1 {
        /// rmax (inputs are |S| and |A|) or urmax (inputs are the guesses
        /// N and k).
        #[arg(long)]
        variant: String,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Exploitation lengths K2 and K3 (with the K0 they depend on).
    K2k3 {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Minimum steps any reliable learner needs, from a growth bound on
    /// the discovery partial sums.
    LowerBound(LowerBoundArgs),
    /// Impossibility floor d and reward gap for a convergent family.
    Gap {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
    },
    /// Check K0 <= f^{-1}(ln(4N/delta)) for a claimed growth bound f.
    K0Bound {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        growth: GrowthArgs,
    },
}

/// Growth bound f for lower-bound and k0-bound.
#[derive(Args)]
pub struct GrowthArgs {
    /// linear, log, or loglog.
    #[arg(long)]
    pub f: String,
    #[arg(long = "f-m1")]
    pub f_m1: f64,
    #[arg(long = "f-m2", default_value_t = 0.0)]
    pub f_m2: f64,
    /// Shift inside the log: f(T) = m1 * ln(T + shift) + m2.
    #[arg(long = "f-shift", default_value_t = 0.0)]
    pub f_shift: f64,
}

impl GrowthArgs {
    fn resolve(&self) -> Result<GrowthBound, String> {
        match self.f.as_str() {
            "linear" => Ok(GrowthBound::Linear {
                m1: self.f_m1,
                m2: self.f_m2,
            }),
            "log" => Ok(GrowthBound::Log {
                m1: self.f_m1,
                shift: self.f_shift,
                m2: self.f_m2,
            }),
            "loglog" => Ok(GrowthBound::LogLog {
                m1: self.f_m1,
                m2: self.f_m2,
            }),
            other => Err(format!(
                "unknown growth form {other:?} (expected linear, log, or loglog)"
            )),
        }
    }

    fn echo(&self) -> serde_json::Value {
        json!({"f": self.f, "m1": self.f_m1, "m2": self.f_m2, "shift": self.f_shift})
    }
}

#[derive(Args)]
pub struct LowerBoundArgs {
    /// linear, log, loglog, or partial-sum.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub m2: f64,
    /// Shift inside the log: f(T) = m1 * ln(T + shift) + m2.
    #[arg(long, default_value_t = 0.0)]
    pub shift: f64,
    /// Family behind --f partial-sum.
    #[arg(long = "family")]
    pub family: Option<String>,
    #[arg(long = "family-c")]
    pub family_c: Option<f64>,
    #[arg(long = "family-alpha")]
    pub family_alpha: Option<f64>,
    #[arg(long = "family-m1")]
    pub family_m1: Option<f64>,
    #[arg(long = "family-values", value_delimiter = ',')]
    pub family_values: Option<Vec<f64>>,
    /// Per-play discovery ceiling c from the impossibility argument.
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

impl LowerBoundArgs {
    fn resolve(&self) -> Result<GrowthBound, String> {
        let m1 = || {
            self.m1
                .ok_or_else(|| format!("--f {} requires --m1", self.f))
        };
        match self.f.as_str() {
            "linear" => Ok(GrowthBound::Linear {
                m1: m1()?,
                m2: self.m2,
            }),
            "log" => Ok(GrowthBound::Log {
                m1: m1()?,
                shift: self.shift,
                m2: self.m2,
            }),
            "loglog" => Ok(GrowthBound::LogLog {
                m1: m1()?,
                m2: self.m2,
            }),
            "partial-sum" => {
                let family = self
                    .family
                    .as_deref()
                    .ok_or("--f partial-sum requires --family")?;
                let fam = resolve_family(
                    family,
                    self.family_c,
                    self.family_alpha,
                    self.family_m1,
                    self.family_values.as_deref(),
                    "family-",
                )?;
                Ok(GrowthBound::PartialSum(fam))
            }
            other => Err(format!(
                "unknown growth form {other:?} (expected linear, log, loglog, or partial-sum)"
            )),
        }
    }
}

fn one_line(s: &str) -> String {
    s.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}

fn fail(message: &str, code: i32) -> i32 {
    eprintln!("error: {}", one_line(message));
    code
}

fn theory_exit(result: Result<(String, serde_json::Value), String>) -> i32 {
    match result {
        Ok((line, jsonv)) => {
            println!("{line}");
            println!("{jsonv}");
            0
        }
        Err(message) => fail(&message, 1),
    }
}

fn run_theory(which: TheoryCommand) -> i32 {
    match which {
        TheoryCommand::K0 { family, n, delta } => theory_exit((|| {
            let fam = family.resolve()?;
            let value = k0(&fam, n, delta).map_err(|e| e.to_string())?;
            Ok((
                format!("K0 = {value}"),
                json!({"subcommand": "k0", "inputs": {"family": family.echo(), "N": n, "delta": delta}, "output": value}),
            ))
        })()),
        TheoryCommand::K1 {
            variant,
            n,
            k,
            horizon,
            rmax,
            eps,
            delta,
        } => theory_exit((|| {
            let value = match variant.as_str() {
                "rmax" => k1_rmax(n, k, horizon, rmax, eps, delta),
                "urmax" => k1_urmax(n, k, horizon, rmax, eps, delta),
                other => {
                    return Err(format!(
                        "unknown variant {other:?} (expected rmax or urmax)"
                    ))
                }
            }
            .map_err(|e| e.to_string())?;
            Ok((
                format!("K1 = {value}"),
                json!({"subcommand": "k1", "inputs": {"variant": variant, "N": n, "k": k, "T": horizon, "rmax": rmax, "eps": eps, "delta": delta}, "output": value}),
            ))
        })()),
        TheoryCommand::K2k3 {
            family,
            n,
            k,
            horizon,
            rmax,
            eps,
            delta,
        } => theory_exit((|| {
            let fam = family.resolve()?;
            let k0v = k0(&fam, n, delta).map_err(|e| e.to_string())?;
            let (k2, k3) =
                k2_k3(n, k, horizon, rmax, eps, delta, &k0v).map_err(|e| e.to_string())?;
            Ok((
                format!("K2 = {k2}, K3 = {k3} (using K0 = {k0v})"),
                json!({"subcommand": "k2k3", "inputs": {"family": family.echo(), "N": n, "k": k, "T": horizon, "rmax": rmax, "eps": eps, "delta": delta}, "output": {"k0": k0v, "k2": k2, "k3": k3}}),
            ))
        })()),
        TheoryCommand::LowerBound(args) => theory_exit((|| {
            let growth = args.resolve()?;
            let value =
                lower_bound_steps(&growth, args.c, args.delta).map_err(|e| e.to_string())?;
            Ok((
                format!("lower bound = {value}"),
                json!({"subcommand": "lower-bound", "inputs": {"f": growth, "c": args.c, "delta": args.delta}, "output": value}),
            ))
        })()),
        TheoryCommand::Gap { family, r1, r2 } => theory_exit((|| {
            let fam = family.resolve()?;
            let gap = impossibility_gap(&fam, r1, r2).map_err(|e| e.to_string())?;
            Ok((
                format!("d = {}, gap = {}", gap.d, gap.gap),
                json!({"subcommand": "gap", "inputs": {"family": family.echo(), "r1": r1, "r2": r2}, "output": {"c1": gap.c1, "total_mass": gap.total_mass, "d": gap.d, "gap": gap.gap}}),
            ))
        })()),
        TheoryCommand::K0Bound {
            family,
            n,
            delta,
            growth,
        } => theory_exit((|| {
            let fam = family.resolve()?;
            let g = growth.resolve()?;
            let holds = k0_upper_bound_check(&fam, &g, n, delta).map_err(|e| e.to_string())?;
            Ok((
                format!("bound holds: {holds}"),
                json!({"subcommand": "k0-bound", "inputs": {"family": family.echo(), "N": n, "delta": delta, "f": growth.echo()}, "output": holds}),
            ))
        })()),
    }
}

fn run_validate(file: &Path) -> i32 {
    match load_scenario(file) {
        Ok(scenario) => {
            let report = validate_mdpu(&scenario.spec, scenario.knowledge.known_rmax);
            println!(
                "ok: {} ({} states, {} aware)",
                scenario.name,
                scenario.spec.n_states(),
                scenario.spec.aware_states.len()
            );
            for w in &report.warnings {
                println!("warning: {w}");
            }
            0
        }
        Err(e) => fail(&e.to_string(), 1),
    }
}

fn run_run(args: RunArgs) -> i32 {
    let plan = ExperimentPlan {
        scenario: args.scenario,
        algo: args.algo,
        seed_start: args.seeds.0,
        seed_end: args.seeds.1,
        k0_override: args.override_k0,
        k1_override: args.override_k1,
        replay_override: args.override_replay,
        max_steps: args.max_steps,
        include_explore_rewards: args.include_explore_rewards,
        oracle: args.oracle,
        out_dir: args.out,
    };
    match run_experiment(&plan) {
        Ok(summary) => {
            println!(
                "wrote {} seed traces, summary.csv, summary.json to {}",
                summary.rows.len(),
                plan.out_dir.display()
            );
            println!("mean avg_reward = {}", summary.aggregates.mean_avg_reward);
            if let Some(v) = summary.oracle_value {
                println!("oracle value = {v}");
            }
            if summary.any_fault() {
                for f in &summary.faults {
                    eprintln!("error: fault: {}", one_line(f));
                }
                2
            } else {
                0
            }
        }
        Err(HarnessError::Io { path, source }) => {
            fail(&format!("cannot write {}: {source}", path.display()), 2)
        }
        Err(e) => fail(&e.to_string(), 1),
    }
}

fn run_demo(which: DemoCommand) -> i32 {
    match which {
        DemoCommand::Example1 {
            trials,
            horizon,
            out,
        } => {
            let rows = match demo_example1(trials, horizon) {
                Ok(rows) => rows,
                Err(e) => return fail(&e.to_string(), 1),
            };
            let csv = demo_csv(&rows);
            if let Err(e) = std::fs::create_dir_all(&out)
                .and_then(|_| std::fs::write(out.join("demo_example1.csv"), &csv))
            {
                return fail(&format!("cannot write {}: {e}", out.display()), 2);
            }
            print!("{csv}");
            0
        }
    }
}

/// Parse `argv` and execute; returns the process exit code.
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("bad arguments");
            let message = first.strip_prefix("error: ").unwrap_or(first);
            return fail(message, 1);
        }
    };
    match cli.command {
        Command::Validate { file } => run_validate(&file),
        Command::Run(args) => run_run(args),
        Command::Demo { which } => run_demo(which),
        Command::Theory { which } => run_theory(which),
    }
}
