use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use qdcca::config::{AnalysisConfig, Calendar, CONFIG_KEYS};
use qdcca::output::write_outputs;
use qdcca::pipeline::{load_dataset, run_analysis, Stages};
use qdcca::synth::{block_matrix, generate_prices, write_wide_csv, Generator, SynthSpec};
use qdcca::{Error, Result};

#[derive(Parser)]
#[command(name = "qdcca", version, about = "Rolling-window q-dependent detrended correlation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full sweep: spectra, trees, communities, lags and threshold periods.
    Analyze(Overrides),
    /// Eigenvalue spectra and eigenvector entropies only.
    Spectra(Overrides),
    /// Minimum spanning trees, edge lists and topology only.
    Mst(Overrides),
    /// Louvain communities and anchor co-membership only.
    Clusters(Overrides),
    /// Lagged anchor correlations only.
    Lagged(Overrides),
    /// Threshold periods of anchor correlations only.
    Periods(Overrides),
    /// Write synthetic minute prices as a wide CSV.
    Synth(SynthArgs),
    /// Check config and input files without computing.
    Validate(Overrides),
}

/// Every config key as a flag; flags override the config file.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    #[arg(long)]
    poly_order: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    base: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    residual: Option<bool>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lags: Option<Vec<i64>>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    anchors: Option<Vec<String>>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    verbose: Option<bool>,
    #[arg(long)]
    network_resolution: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    network_weighted_path: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    network_edges: Option<bool>,
    #[arg(long, value_parser = parse_calendar)]
    data_calendar: Option<Calendar>,
    #[arg(long)]
    data_max_missing: Option<f64>,
    #[arg(long)]
    data_peg_ratio: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    data_global_normalization: Option<bool>,
}

fn parse_calendar(s: &str) -> std::result::Result<Calendar, String> {
    match s {
        "continuous" => Ok(Calendar::Continuous),
        "sessions" => Ok(Calendar::Sessions),
        other => Err(format!("unknown calendar `{other}` (continuous | sessions)")),
    }
}

impl Overrides {
    fn resolve(&self) -> Result<AnalysisConfig> {
        let mut c = match &self.config {
            Some(path) => AnalysisConfig::load(path)?,
            None => AnalysisConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $($target:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$field { c.$($target).+ = v.clone(); })*
            };
        }
        set!(
            q => q, s => s, poly_order => poly_order, window => window, step => step, base => base,
            residual => residual, lags => lags, threshold => threshold, anchors => anchors,
            threads => threads, seed => seed, verbose => verbose,
            network_resolution => network.resolution, network_weighted_path => network.weighted_path,
            network_edges => network.edges, data_calendar => data.calendar,
            data_max_missing => data.max_missing, data_peg_ratio => data.peg_ratio,
            data_global_normalization => data.global_normalization,
        );
        if let Some(p) = &self.input {
            c.input = Some(p.clone());
        }
        if let Some(p) = &self.out {
            c.out = Some(p.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// iid | correlated | ar1 | factor | async-factor | blocks
    #[arg(long, default_value = "factor")]
    generator: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Number of minute prices.
    #[arg(long, default_value_t = 50_000)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
    /// Return volatility per minute.
    #[arg(long, default_value_t = 1e-3)]
    vol: f64,
    /// Pairwise correlation for `correlated`.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Coefficient for `ar1`.
    #[arg(long, default_value_t = 0.9)]
    phi: f64,
    /// Per-minute quote update probability for `async-factor`.
    #[arg(long, default_value_t = 0.05)]
    trade_prob: f64,
    /// Idiosyncratic noise for `async-factor`.
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// Block sizes for `blocks`, summing to n.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.8)]
    within: f64,
    #[arg(long, default_value_t = 0.0)]
    across: f64,
}

impl SynthArgs {
    fn spec(&self) -> Result<SynthSpec> {
        let generator = match self.generator.as_str() {
            "iid" => Generator::Iid,
            "correlated" => {
                Generator::Correlated {
                    target: block_matrix(&[self.n], self.rho, 0.0),
                }
            }
            "ar1" => Generator::Ar1 { phi: self.phi },
            "factor" => Generator::Factor,
            "async-factor" => Generator::AsyncFactor {
                trade_prob: self.trade_prob,
                noise: self.noise,
            },
            "blocks" => Generator::Blocks {
                sizes: self.blocks.clone().unwrap_or_else(|| vec![self.n / 2, self.n - self.n / 2]),
                within: self.within,
                across: self.across,
            },
            other => return Err(Error::Config(format!("unknown generator `{other}`"))),
        };
        Ok(SynthSpec {
            vol: self.vol,
            ..SynthSpec::new(generator, self.n, self.t, self.seed)
        })
    }
}

fn stages_for(command: &Command) -> Stages {
    let mut s = Stages::NONE;
    match command {
        Command::Analyze(_) => return Stages::ALL,
        Command::Spectra(_) => s.spectra = true,
        Command::Mst(_) => s.network = true,
        Command::Clusters(_) => s.communities = true,
        Command::Lagged(_) => s.lagged = true,
        Command::Periods(_) => s.periods = true,
        Command::Synth(_) | Command::Validate(_) => {}
    }
    s
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Analyze(_) => "analyze",
        Command::Spectra(_) => "spectra",
        Command::Mst(_) => "mst",
        Command::Clusters(_) => "clusters",
        Command::Lagged(_) => "lagged",
        Command::Periods(_) => "periods",
        Command::Synth(_) => "synth",
        Command::Validate(_) => "validate",
    }
}

fn init_logging(verbose: bool) {
    let level = if verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn input_of(cfg: &AnalysisConfig) -> Result<PathBuf> {
    cfg.input
        .clone()
        .ok_or_else(|| Error::Config("no input given (--input or `input` in the config file)".into()))
}

fn run(command: Command) -> Result<()> {
    let name = command_name(&command);
    let stages = stages_for(&command);
    match command {
        Command::Synth(args) => {
            init_logging(false);
            let spec = args.spec()?;
            let prices = generate_prices(&spec)?;
            write_wide_csv(&args.out, &prices)?;
            let summary = serde_json::json!({
                "generator": spec.generator.name(),
                "n": spec.n,
                "t": spec.t,
                "seed": spec.seed,
                "out": args.out.display().to_string(),
            });
            println!("{summary}");
            Ok(())
        }
        Command::Validate(o) => {
            let cfg = o.resolve()?;
            init_logging(cfg.verbose);
            let input = input_of(&cfg)?;
            let data = load_dataset(&input, &cfg)?;
            let windows = qdcca_core::window::rolling_windows(data.returns.len(), cfg.plan())
                .map(|w| w.len())
                .unwrap_or(0);
            let summary = serde_json::json!({
                "status": "ok",
                "config_hash": cfg.hash(),
                "data": data.summary(),
                "windows": windows,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Analyze(o)
        | Command::Spectra(o)
        | Command::Mst(o)
        | Command::Clusters(o)
        | Command::Lagged(o)
        | Command::Periods(o) => {
            let cfg = o.resolve()?;
            init_logging(cfg.verbose);
            let input = input_of(&cfg)?;
            let out = cfg
                .out
                .clone()
                .ok_or_else(|| Error::Config("no output directory given (--out or `out`)".into()))?;
            let data = load_dataset(&input, &cfg)?;
            let result = run_analysis(&cfg, &data, stages)?;
            let manifest = write_outputs(&out, name, &cfg, stages, data.summary(), &result)?;
            let summary = serde_json::json!({
                "status": "ok",
                "out": out.display().to_string(),
                "windows": manifest.windows,
                "files": manifest.outputs.len() + 1,
            });
            println!("{summary}");
            Ok(())
        }
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let mut keys = String::from("Config keys (TOML file via --config; each also a flag, dots and underscores become dashes):\n");
    for (key, help) in CONFIG_KEYS {
        keys.push_str(&format!("  {key:<28} {help}\n"));
    }
    let cmd = Cli::command()
        .after_help(keys.clone())
        .mut_subcommands(|sub| sub.after_help(keys.clone()));
    let matches = match cmd.try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return ExitCode::from(2);
            }
            report("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            report("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
