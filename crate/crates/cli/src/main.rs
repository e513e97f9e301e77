//! `grespipe`: drive the GRES discovery pipeline from the command line.
//!
//! ```text
//! grespipe mock-sinfo   --fixture kebnekaise.fixture --bare
//! grespipe infoprovider --fixture kebnekaise.fixture --config site.conf [--serve]
//! grespipe arcinfo      http://127.0.0.1:8086/info
//! grespipe arcsub       hello.xrsl --rte-dir rte --spool-dir spool [--match URL]
//! ```
//!
//! Exit codes: 0 success, 1 refused (no services, no matching target),
//! 2 bad input, 3 environment failure (e.g. the port is taken).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "grespipe", version, about = "GPU/GRES discovery pipeline for grid compute elements")]
struct Cli {
    /// Site configuration file (key=value).
    #[arg(long, global = true, env = "GRESPIPE_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print what `sinfo -a -h -o "gresinfo=%G"` would print for a fixture.
    MockSinfo {
        #[arg(long, env = "GRESPIPE_FIXTURE")]
        fixture: PathBuf,
        /// Strip the `gresinfo=` key, giving plain `%G` output.
        #[arg(long)]
        bare: bool,
    },
    /// Print the GLUE2 info document, or serve it over HTTP with --serve.
    Infoprovider(InfoproviderArgs),
    /// Show the computing services described by an info URL or file.
    Arcinfo {
        /// `http://` URL or path to an XML file.
        source: String,
    },
    /// Turn an XRSL job description into a batch script in the spool.
    Arcsub(ArcsubArgs),
}

#[derive(Debug, Args)]
struct InfoproviderArgs {
    #[arg(long, env = "GRESPIPE_FIXTURE", required_unless_present = "sinfo", conflicts_with = "sinfo")]
    fixture: Option<PathBuf>,
    /// Query a real SLURM installation through this sinfo binary.
    #[arg(long)]
    sinfo: Option<PathBuf>,
    /// Cluster name when using --sinfo.
    #[arg(long, default_value = "localhost")]
    cluster: String,
    #[arg(long)]
    serve: bool,
    /// host:port to listen on; overrides `bind` from the config file.
    #[arg(long, env = "GRESPIPE_BIND")]
    bind: Option<String>,
    /// Overrides `refresh_interval_seconds` from the config file.
    #[arg(long)]
    refresh_interval: Option<u64>,
}

#[derive(Debug, Args)]
struct ArcsubArgs {
    xrsl: PathBuf,
    /// Directory of `*.rte` runtime environment manifests.
    #[arg(long, env = "GRESPIPE_RTE_DIR")]
    rte_dir: Option<PathBuf>,
    #[arg(long, env = "GRESPIPE_SPOOL_DIR", default_value = "spool")]
    spool_dir: PathBuf,
    /// Refuse the job unless a target advertised at this info URL can
    /// satisfy its --gres request.
    #[arg(long = "match", value_name = "URL")]
    match_url: Option<String>,
    /// Submission time as Unix seconds (defaults to now).
    #[arg(long, env = "GRESPIPE_NOW", hide = true)]
    now: Option<i64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MockSinfo { fixture, bare } => commands::mock_sinfo(&fixture, bare),
        Command::Infoprovider(args) => commands::infoprovider(cli.config.as_deref(), args),
        Command::Arcinfo { source } => commands::arcinfo(&source),
        Command::Arcsub(args) => commands::arcsub(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("grespipe: {failure:#}");
            ExitCode::from(failure.exit_code())
        }
    }
}
