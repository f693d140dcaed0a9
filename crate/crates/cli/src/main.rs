//! `aklt`: sampling, percolation scans, ensemble statistics and oracle
//! checks for random graph states reduced from the honeycomb AKLT state.

mod oracle_cmd;
mod percolate;
mod run_dir;
mod sample;
mod settings;
mod stats_cmd;
mod workers;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand};

use aklt_core::{Ansatz, Axis, Boundary, DeletionMode};

use settings::{
    check_inputs, oracle_options, pick, pick_list, validate_sides, ChainSettings, ConventionChoice, ConventionSetting,
    FileConfig, GridSpec, DEFAULT_GRID, DEFAULT_OUT,
};

#[derive(Parser)]
#[command(
    name = "aklt",
    version,
    about = "Honeycomb AKLT random graph states: sampling, percolation and exact checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample POVM outcome configurations and record reduced-graph observables.
    Sample(SampleArgs),
    /// Spanning-cluster probability under random vertex or edge deletion.
    Percolate(PercolateArgs),
    /// Per-L summaries and L -> infinity extrapolation from sample CSVs.
    Stats(StatsArgs),
    /// Exact state-vector checks on small fragments.
    OracleVerify(OracleArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file of run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Root directory; each run writes to <out>/<command>-<config hash>.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    /// Side lengths, comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    sides: Vec<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thinning: Option<usize>,
    /// Independent chains per side length.
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    boundary: Option<Boundary>,
    #[arg(long, value_enum)]
    convention: Option<ConventionChoice>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// Also write the raw outcome configurations (input for `percolate --input`).
    #[arg(long)]
    save_configs: bool,
}

#[derive(Args)]
struct PercolateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// Deletion mode; repeat for several. Default: both.
    #[arg(long)]
    mode: Vec<DeletionMode>,
    /// start:stop:step, inclusive.
    #[arg(long)]
    p_grid: Option<String>,
    /// Deletion trials per sampled graph and grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Spanning probability defining the threshold.
    #[arg(long)]
    level: Option<f64>,
    /// Sides a spanning cluster must join: horizontal, vertical or both.
    #[arg(long)]
    axis: Option<Axis>,
    /// Configuration CSVs written by `sample --save-configs`.
    #[arg(long)]
    input: Vec<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sample CSVs written by `aklt sample`.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Finite-size form: inverse_l or inverse_l_squared.
    #[arg(long)]
    ansatz: Option<Ansatz>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Fragment JSON file ({sites, edges} or a list of them); repeatable.
    /// Default: the built-in fragments.
    #[arg(long)]
    fragment: Vec<PathBuf>,
    /// Prefactor of the POVM elements (negative control).
    #[arg(long, hide = true)]
    povm_constant: Option<f64>,
}

fn out_root(common: &CommonArgs, file: &FileConfig) -> PathBuf {
    pick(common.out.clone(), file.out.clone(), PathBuf::from(DEFAULT_OUT))
}

fn chain_settings(args: &ChainArgs, file: &FileConfig) -> Result<ChainSettings> {
    let chain = ChainSettings {
        burn_in: pick(args.burn_in, file.burn_in, 2000),
        n_samples: pick(args.samples, file.n_samples, 500),
        thinning: pick(args.thinning, file.thinning, 10),
        chains: pick(args.chains, file.chains, 1),
    };
    chain.validate()?;
    Ok(chain)
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref(), "sample")?;
    let boundary = pick(args.chain.boundary, file.boundary, Boundary::Periodic);
    let sides = pick_list(args.chain.sides.clone(), file.sides.clone(), vec![]);
    validate_sides(&sides, boundary)?;
    let cfg = sample::SampleConfig {
        command: "sample",
        sides,
        boundary,
        seed: pick(args.common.seed, file.seed, 0),
        chain: chain_settings(&args.chain, &file)?,
        convention: ConventionSetting::resolve(pick(
            args.chain.convention,
            file.convention,
            ConventionChoice::default(),
        ))?,
        save_configs: args.save_configs || file.save_configs.unwrap_or(false),
    };
    sample::run(&cfg, &out_root(&args.common, &file), workers::thread_count()?)?;
    Ok(())
}

fn cmd_percolate(args: PercolateArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref(), "percolate")?;
    let inputs = pick_list(args.input.clone(), file.inputs.clone(), vec![]);
    check_inputs(&inputs)?;
    let level = pick(args.level, file.level, 0.5);
    ensure!(level > 0.0 && level < 1.0, "level must lie in (0, 1), got {level}");
    let trials = pick(args.trials, file.trials, 20);
    ensure!(trials >= 1, "trials must be at least 1");
    let grid = GridSpec::parse(&pick(args.p_grid.clone(), file.p_grid.clone(), DEFAULT_GRID.to_owned()))?;
    let modes = pick_list(
        args.mode.clone(),
        file.modes.clone(),
        vec![DeletionMode::Vertex, DeletionMode::Edge],
    );

    let requested_sides = pick_list(args.chain.sides.clone(), file.sides.clone(), vec![]);
    let (configs, sources, boundary, sides) = if inputs.is_empty() {
        let boundary = pick(args.chain.boundary, file.boundary, Boundary::Open);
        validate_sides(&requested_sides, boundary)?;
        (None, vec![], boundary, requested_sides)
    } else {
        let (mut by_side, sources, boundary) = percolate::load_configs(&inputs)?;
        if !requested_sides.is_empty() {
            for l in &requested_sides {
                ensure!(by_side.contains_key(l), "inputs hold no samples at L={l}");
            }
            by_side.retain(|l, _| requested_sides.contains(l));
        }
        let sides: Vec<usize> = by_side.keys().copied().collect();
        (Some(by_side), sources, boundary, sides)
    };
    let cfg = percolate::PercolateConfig {
        command: "percolate",
        sides,
        boundary,
        seed: pick(args.common.seed, file.seed, 0),
        chain: chain_settings(&args.chain, &file)?,
        convention: ConventionSetting::resolve(pick(
            args.chain.convention,
            file.convention,
            ConventionChoice::default(),
        ))?,
        modes,
        p_grid: grid,
        trials,
        level,
        axis: pick(args.axis, file.axis, Axis::Both),
        inputs,
        sources,
    };
    percolate::run(&cfg, configs, &out_root(&args.common, &file), workers::thread_count()?)?;
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref(), "stats")?;
    let inputs = pick_list(args.input.clone(), file.inputs.clone(), vec![]);
    ensure!(!inputs.is_empty(), "no sample files given (use --input)");
    check_inputs(&inputs)?;
    let (by_side, sources) = stats_cmd::load_samples(&inputs)?;
    let cfg = stats_cmd::StatsConfig {
        command: "stats",
        inputs,
        ansatz: pick(args.ansatz, file.ansatz, Ansatz::default()),
        sources,
    };
    stats_cmd::run(&cfg, &by_side, &out_root(&args.common, &file))?;
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref(), "oracle-verify")?;
    let paths = pick_list(args.fragment.clone(), file.fragments.clone(), vec![]);
    let fragments = oracle_cmd::load_fragments(&paths)?;
    let cfg = oracle_cmd::OracleConfig {
        command: "oracle-verify",
        fragments: paths,
        options: oracle_options(pick(args.common.seed, file.seed, 0), args.povm_constant)?,
    };
    let (_, report) = oracle_cmd::run(&cfg, &fragments, &out_root(&args.common, &file))?;
    oracle_cmd::failed_checks(&report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Percolate(a) => cmd_percolate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::OracleVerify(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
