use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use chrono::{DateTime, Utc};
use grespipe_core::client::{fetch_info, format_arcinfo, parse_execution_targets, ParseError};
use grespipe_core::gres::{parse_gres_expression, GresList};
use grespipe_core::infoprovider::{
    build_computing_service, render_glue2_xml, serve_info, EndpointConfig, PipelineSource, ServeError,
    SiteConfig,
};
use grespipe_core::jobsubmit::{
    apply_rtes, generate_submit_script, match_target, parse_xrsl_with_warnings, requested_gres, RteRegistry,
    Spool,
};
use grespipe_core::lrms::{
    sinfo_query, ClusterFixture, LrmsBackend, SinfoExecBackend, SlurmFixtureBackend, GRES_FORMAT,
};

use crate::{ArcsubArgs, InfoproviderArgs};

const DEFAULT_BIND: &str = "127.0.0.1:8086";

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// The request was understood but cannot be honoured.
    Refused(anyhow::Error),
    Input(anyhow::Error),
    Environment(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Refused(_) => 1,
            Self::Input(_) => 2,
            Self::Environment(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Self::Refused(e) | Self::Input(e) | Self::Environment(e)) = self;
        if f.alternate() {
            write!(f, "{e:#}")
        } else {
            write!(f, "{e}")
        }
    }
}

type CmdResult = Result<(), Failure>;

trait OrInput<T> {
    fn or_input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrInput<T> for Result<T, E> {
    fn or_input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn load_fixture(path: &Path) -> Result<ClusterFixture, Failure> {
    let fixture = ClusterFixture::load(path).or_input()?;
    fixture.validate().or_input()?;
    Ok(fixture)
}

fn print(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| Failure::Environment(e.into()))
}

pub fn mock_sinfo(fixture: &Path, bare: bool) -> CmdResult {
    let fixture = load_fixture(fixture)?;
    let prefix = GRES_FORMAT.trim_end_matches("%G");
    let mut text = String::new();
    for line in sinfo_query(&fixture, GRES_FORMAT).or_input()? {
        let line = if bare { line.strip_prefix(prefix).unwrap_or(&line) } else { &line };
        text.push_str(line);
        text.push('\n');
    }
    print(&text)
}

pub fn infoprovider(config: Option<&Path>, args: InfoproviderArgs) -> CmdResult {
    let backend: Box<dyn LrmsBackend> = match (&args.fixture, &args.sinfo) {
        (Some(path), _) => Box::new(SlurmFixtureBackend::new(load_fixture(path)?).or_input()?),
        (None, Some(sinfo)) => Box::new(SinfoExecBackend::new(&args.cluster, sinfo)),
        (None, None) => return Err(Failure::Input(anyhow!("either --fixture or --sinfo is required"))),
    };
    let site = match config {
        Some(path) => SiteConfig::load(path).or_input()?,
        None => SiteConfig::for_cluster(backend.cluster_name(), backend.flavour()),
    };

    if !args.serve {
        let snapshot = backend
            .collect()
            .context("collecting cluster information")
            .or_input()?;
        let record = build_computing_service(&snapshot, &site).or_input()?;
        return print(&render_glue2_xml(&record));
    }

    let bind = args
        .bind
        .or_else(|| site.bind.clone())
        .unwrap_or_else(|| DEFAULT_BIND.to_owned());
    let refresh = args
        .refresh_interval
        .map(Duration::from_secs)
        .unwrap_or_else(|| site.refresh_interval());
    let source = Arc::new(PipelineSource::new(backend, site));
    let server = serve_info(source, EndpointConfig::new(bind, refresh)).map_err(|e| match e {
        ServeError::Source(_) => Failure::Input(e.into()),
        _ => Failure::Environment(e.into()),
    })?;
    print(&format!("Serving {}\n", server.info_url()))?;

    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Environment(e.into()))?;
    runtime
        .block_on(tokio::signal::ctrl_c())
        .map_err(|e| Failure::Environment(e.into()))?;
    log::info!("interrupted, shutting down");
    server.shutdown().map_err(|e| Failure::Environment(e.into()))
}

fn read_info(source: &str) -> Result<String, Failure> {
    if source.contains("://") {
        fetch_info(source).or_input()
    } else {
        fs::read_to_string(source)
            .with_context(|| format!("reading {source}"))
            .or_input()
    }
}

fn parse_info(xml: &str) -> Result<Vec<grespipe_core::infoprovider::ComputingServiceRecord>, Failure> {
    parse_execution_targets(xml).map_err(|e| match e {
        ParseError::NoServices => Failure::Refused(e.into()),
        ParseError::MalformedXml(_) => Failure::Input(e.into()),
    })
}

pub fn arcinfo(source: &str) -> CmdResult {
    let records = parse_info(&read_info(source)?)?;
    print(&format_arcinfo(&records))
}

pub fn arcsub(args: ArcsubArgs) -> CmdResult {
    let text = fs::read_to_string(&args.xrsl)
        .with_context(|| format!("reading {}", args.xrsl.display()))
        .or_input()?;
    let (job, warnings) = parse_xrsl_with_warnings(&text)
        .with_context(|| format!("parsing {}", args.xrsl.display()))
        .or_input()?;
    for warning in warnings {
        eprintln!("grespipe: warning: {warning}");
    }
    let registry = match &args.rte_dir {
        Some(dir) => RteRegistry::load_dir(dir).or_input()?,
        None => RteRegistry::new(),
    };
    let opts = apply_rtes(&job, &registry).or_input()?;

    if let Some(url) = &args.match_url {
        let request = requested_gres(&opts.node_properties).or_input()?;
        let records = parse_info(&fetch_info(url).or_input()?)?;
        let satisfied = records.iter().any(|record| {
            let classes: Vec<GresList> = record
                .manager
                .general_resources
                .iter()
                .filter_map(|line| match parse_gres_expression(line) {
                    Ok(list) => Some(list),
                    Err(e) => {
                        log::warn!("ignoring unparseable advertised resource {line:?}: {e}");
                        None
                    }
                })
                .collect();
            match_target(&request, &classes)
        });
        if !satisfied {
            return Err(Failure::Refused(anyhow!(
                "no target advertised at {url} satisfies the request --gres={request}"
            )));
        }
    }

    let script = generate_submit_script(&opts);
    let now = match args.now {
        Some(secs) => DateTime::from_timestamp(secs, 0)
            .ok_or_else(|| anyhow!("--now {secs} is out of range"))
            .or_input()?,
        None => Utc::now(),
    };
    let job = Spool::new(&args.spool_dir)
        .submit(&script, now)
        .with_context(|| format!("writing to spool {}", args.spool_dir.display()))
        .map_err(Failure::Environment)?;
    print(&format!(
        "Job submitted with jobid: {}\nScript: {}\n",
        job.job_id,
        job.path.display()
    ))
}
