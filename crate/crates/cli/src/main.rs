use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lathide::harness::{
    self, EmbedJob, ExperimentConfig, ExtractJob, HostSource, MessageSource, MethodChoice, Sweep,
    DEFAULT_ORACLE_TRIALS,
};
use lathide::{CodeSpec, Epsilon, Error};

#[derive(Parser)]
#[command(
    name = "lathide",
    version,
    about = "Nested-lattice data hiding: QIM and minimum-distortion QIM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CodeArgs {
    /// Code spec: <lattice>:<alpha> or <lattice>:J=<file>, e.g. A2:2, E8:2, Z:4
    #[arg(long)]
    code: CodeSpec,
    /// Rescale the fine lattice to unit cell volume (same as a ":unit" suffix)
    #[arg(long)]
    unit_volume: bool,
}

impl CodeArgs {
    fn spec(&self) -> CodeSpec {
        self.code.clone().with_unit_volume(self.unit_volume)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print lattice geometry, payload, rate and coset representatives
    Info {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Embed a message into a host signal, writing CSV plus a JSON sidecar
    Embed {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "mdqim")]
        method: MethodChoice,
        /// Back-off from the packing sphere: auto | <x> | <x>dmin
        #[arg(long, default_value = "auto")]
        epsilon: Epsilon,
        /// csv:<path> | wfdb:<record>[,<channel>] | uniform:<lo>,<hi>,<count> | cells:<blocks>[,<cells>]
        #[arg(long)]
        host: HostSource,
        /// Payload file, or random:<seed>
        #[arg(long)]
        message: MessageSource,
        /// Bytes drawn for random:<seed> messages
        #[arg(long, default_value_t = 1024)]
        message_len: usize,
        #[arg(long, default_value_t = 1.0)]
        host_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar path (default <out>.json)
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Recover the payload from an embedded CSV signal
    Extract {
        /// Embedded signal (CSV)
        #[arg(long)]
        input: PathBuf,
        /// Sidecar path (default <input>.json)
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Override the code recorded in the sidecar
        #[arg(long)]
        code: Option<CodeSpec>,
        /// Write the recovered payload here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Original payload; reports symbol and byte error counts
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Paired QIM vs MD-QIM Monte Carlo run; prints a JSON report
    Simulate(SimulateArgs),
    /// QIM MSE, MD-QIM lower bound and Monte Carlo oracle side by side
    Bound {
        #[command(flatten)]
        code: CodeArgs,
        /// auto | <x> | <x>dmin (default 0, the ε → 0 limit)
        #[arg(long, default_value = "0")]
        epsilon: Epsilon,
        /// Monte Carlo oracle trials (0 disables the oracle)
        #[arg(long, default_value_t = DEFAULT_ORACLE_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Start from a JSON config (e.g. the "config" echo of an earlier report)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<CodeSpec>,
    #[arg(long)]
    unit_volume: bool,
    #[arg(long)]
    method: Option<MethodChoice>,
    #[arg(long)]
    epsilon: Option<Epsilon>,
    /// Default cells:<trials>,32
    #[arg(long)]
    host: Option<HostSource>,
    /// Default random:<seed>
    #[arg(long)]
    message: Option<MessageSource>,
    #[arg(long)]
    host_scale: Option<f64>,
    /// AWGN standard deviation for the message error rate
    #[arg(long)]
    sigma: Option<f64>,
    /// Number of synthetic host blocks
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    oracle_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated nesting factors to sweep
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep_sigma")]
    sweep_alpha: Option<Vec<u32>>,
    /// Comma-separated noise levels to sweep
    #[arg(long, value_delimiter = ',')]
    sweep_sigma: Option<Vec<f64>>,
    /// JSON report path (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV series path for sweeps
    #[arg(long)]
    series: Option<PathBuf>,
}

impl SimulateArgs {
    fn config(self) -> lathide::Result<(ExperimentConfig, Option<PathBuf>, Option<PathBuf>)> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.code {
            c.code = v;
        }
        c.code = c.code.with_unit_volume(self.unit_volume);
        if let Some(v) = self.method {
            c.method = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = self.host {
            c.host = Some(v);
        }
        if let Some(v) = self.message {
            c.message = Some(v);
        }
        if let Some(v) = self.host_scale {
            c.host_scale = v;
        }
        if let Some(v) = self.sigma {
            c.sigma = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.oracle_trials {
            c.oracle_trials = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.sweep_alpha {
            c.sweep = Some(Sweep::Alpha(v));
        }
        if let Some(v) = self.sweep_sigma {
            c.sweep = Some(Sweep::Sigma(v));
        }
        if self.series.is_some() && c.sweep.is_none() {
            return Err(Error::Config(
                "--series needs --sweep-alpha or --sweep-sigma".into(),
            ));
        }
        Ok((c, self.out, self.series))
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> lathide::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> lathide::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(command: Command) -> lathide::Result<()> {
    match command {
        Command::Info { code, json } => {
            let report = harness::info_report(&code.spec())?;
            if json {
                emit(&(serde_json::to_string_pretty(&report)? + "\n"))?;
            } else {
                emit(&report.to_text())?;
            }
        }
        Command::Embed {
            code,
            method,
            epsilon,
            host,
            message,
            message_len,
            host_scale,
            seed,
            out,
            sidecar,
        } => {
            let job = EmbedJob {
                code: code.spec(),
                method: method.single()?,
                epsilon,
                host,
                message,
                message_len,
                host_scale,
                seed,
                out,
                sidecar,
            };
            let meta = harness::embed_file(&job)?;
            emit(&(serde_json::to_string_pretty(&meta)? + "\n"))?;
        }
        Command::Extract {
            input,
            sidecar,
            code,
            out,
            reference,
        } => {
            let report = harness::extract_file(&ExtractJob {
                input,
                sidecar,
                code,
                out,
                reference,
            })?;
            emit(&(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::Simulate(args) => {
            let (config, out, series) = args.config()?;
            let report = harness::simulate(&config)?;
            let json = report.to_json()?;
            match out {
                Some(path) => write_text(&path, &json)?,
                None => emit(&(json + "\n"))?,
            }
            if let Some(path) = series {
                harness::write_series(&report.series, &path)?;
            }
        }
        Command::Bound {
            code,
            epsilon,
            trials,
            seed,
            json,
            out,
        } => {
            let report = harness::bound_report(&code.spec(), epsilon, trials, seed)?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = out {
                write_text(&path, &text)?;
            }
            if json {
                emit(&(text + "\n"))?;
            } else {
                emit(&report.to_text())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
