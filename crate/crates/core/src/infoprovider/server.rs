use std::net::{SocketAddr, TcpListener as StdTcpListener, ToSocketAddrs};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use parking_lot::RwLock;
use thiserror::Error;
use tokio::sync::oneshot;

use super::{build_computing_service, render_glue2_xml, ComputingServiceRecord, SiteConfig};
use crate::lrms::LrmsBackend;

pub type SourceError = Box<dyn std::error::Error + Send + Sync>;

/// Supplies the record published on the info endpoint.
pub trait RecordSource: Send + Sync + 'static {
    fn record(&self) -> Result<ComputingServiceRecord, SourceError>;
}

impl<F> RecordSource for F
where
    F: Fn() -> Result<ComputingServiceRecord, SourceError> + Send + Sync + 'static,
{
    fn record(&self) -> Result<ComputingServiceRecord, SourceError> {
        self()
    }
}

/// Collects from an LRMS backend and wraps the snapshot with site settings.
pub struct PipelineSource {
    backend: Box<dyn LrmsBackend>,
    site: SiteConfig,
}

impl PipelineSource {
    pub fn new(backend: Box<dyn LrmsBackend>, site: SiteConfig) -> Self {
        Self { backend, site }
    }
}

impl RecordSource for PipelineSource {
    fn record(&self) -> Result<ComputingServiceRecord, SourceError> {
        let snapshot = self.backend.collect()?;
        Ok(build_computing_service(&snapshot, &self.site)?)
    }
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub bind: String,
    /// Zero disables refreshing; the first document is served forever.
    pub refresh_interval: Duration,
}

impl EndpointConfig {
    pub fn new(bind: impl Into<String>, refresh_interval: Duration) -> Self {
        Self {
            bind: bind.into(),
            refresh_interval,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}")]
    BindFailure {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("initial collection failed")]
    Source(#[source] SourceError),
    #[error("server runtime error")]
    Runtime(#[from] std::io::Error),
}

type Published = Arc<RwLock<Arc<String>>>;

/// Handle to a running info endpoint. Dropping it stops the server.
pub struct InfoServer {
    addr: SocketAddr,
    document: Published,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<std::io::Result<()>>>,
}

impl InfoServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://<addr>/info`
    pub fn info_url(&self) -> String {
        format!("http://{}/info", self.addr)
    }

    /// The document currently being served.
    pub fn current_document(&self) -> Arc<String> {
        self.document.read().clone()
    }

    /// Stops accepting connections, lets in-flight requests finish and joins
    /// the server thread.
    pub fn shutdown(mut self) -> Result<(), ServeError> {
        self.stop()
    }

    fn stop(&mut self) -> Result<(), ServeError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(handle) => handle
                .join()
                .map_err(|_| ServeError::Runtime(std::io::Error::other("server thread panicked")))?
                .map_err(ServeError::Runtime),
            None => Ok(()),
        }
    }
}

impl Drop for InfoServer {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

fn resolve(bind: &str) -> std::io::Result<SocketAddr> {
    bind.to_socket_addrs()?
        .next()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "no address"))
}

fn render_from(source: &dyn RecordSource) -> Result<String, SourceError> {
    Ok(render_glue2_xml(&source.record()?))
}

/// Starts the info endpoint on a background thread.
///
/// The first document is rendered before this returns. Afterwards a single
/// refresher re-renders every `refresh_interval` and swaps the finished
/// document in; readers always see one complete document.
pub fn serve_info(source: Arc<dyn RecordSource>, cfg: EndpointConfig) -> Result<InfoServer, ServeError> {
    let initial = render_from(source.as_ref()).map_err(ServeError::Source)?;
    let bind_err = |source| ServeError::BindFailure {
        addr: cfg.bind.clone(),
        source,
    };
    let listener = resolve(&cfg.bind)
        .and_then(StdTcpListener::bind)
        .map_err(bind_err)?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;

    let document: Published = Arc::new(RwLock::new(Arc::new(initial)));
    let (tx, rx) = oneshot::channel();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    let published = document.clone();
    let thread = thread::Builder::new()
        .name("info-endpoint".into())
        .spawn(move || runtime.block_on(run(listener, published, source, cfg.refresh_interval, rx)))?;

    log::info!("info endpoint listening on http://{addr}/info");
    Ok(InfoServer {
        addr,
        document,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

async fn run(
    listener: StdTcpListener,
    document: Published,
    source: Arc<dyn RecordSource>,
    refresh_interval: Duration,
    shutdown: oneshot::Receiver<()>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::from_std(listener)?;
    let refresher = (!refresh_interval.is_zero())
        .then(|| tokio::spawn(refresh_loop(document.clone(), source, refresh_interval)));

    let app = Router::new()
        .route("/info", get(info))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(document);
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = shutdown.await;
        })
        .await;
    if let Some(task) = refresher {
        task.abort();
    }
    result
}

async fn refresh_loop(document: Published, source: Arc<dyn RecordSource>, every: Duration) {
    let mut ticker = tokio::time::interval(every);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    // the first tick fires immediately and the initial document is fresh
    ticker.tick().await;
    loop {
        ticker.tick().await;
        let source = source.clone();
        match tokio::task::spawn_blocking(move || render_from(source.as_ref())).await {
            Ok(Ok(xml)) => *document.write() = Arc::new(xml),
            Ok(Err(e)) => log::warn!("refresh failed, keeping previous document: {e:#}"),
            Err(e) => log::warn!("refresh task failed: {e}"),
        }
    }
}

async fn info(State(document): State<Published>) -> impl IntoResponse {
    let body = document.read().clone();
    ([(header::CONTENT_TYPE, "application/xml")], body.as_str().to_owned())
}
