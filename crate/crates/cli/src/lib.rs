//! Command implementations behind the `atlas` binary. Each command writes
//! to caller-supplied streams and returns its exit code.

use std::io::Write;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::thread::JoinHandle;

use anyhow::{Context, Result};
use atlas_core::bundle::{self, BuildOptions, BundleError};
use atlas_core::profiles::load_profiles;
use atlas_core::query::{score_query, top_k};
use clap::{Args, Parser, Subcommand};
use tiny_http::{Header, Method, Response, Server};

#[derive(Debug, Parser)]
#[command(
    name = "atlas",
    version,
    about = "Build, query and preview researcher map bundles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a bundle from a profiles file.
    Build(BuildArgs),
    /// Rank researchers in one variant of a bundle against a topic.
    Query(QueryArgs),
    /// Serve a UI directory and a bundle as static files.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Print the EM log-likelihood trace of every fit.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub variant: String,
    #[arg(long)]
    pub text: String,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub top: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub ui: PathBuf,
    #[arg(long, default_value_t = 8080, value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Build(args) => cmd_build(&args, out, err),
        Command::Query(args) => cmd_query(&args, out, err),
        Command::Serve(args) => match start_server(&args.bundle, &args.ui, args.port, 8) {
            Ok(server) => {
                let _ = writeln!(
                    out,
                    "serving {} and {} on http://127.0.0.1:{}",
                    args.ui.display(),
                    args.bundle.display(),
                    server.port
                );
                let _ = out.flush();
                server.join();
                0
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e:#}");
                1
            }
        },
    }
}

fn stage(e: &BundleError) -> &'static str {
    match e {
        BundleError::Embed { .. } => "embed",
        BundleError::Pca { .. } => "pca",
        BundleError::Gmm { .. } => "gmm",
        BundleError::Io { .. } => "write",
        _ => "serialize",
    }
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let profiles = match load_profiles(&args.input) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: stage=load input={}: {e}", args.input.display());
            return 1;
        }
    };
    let options = BuildOptions {
        seed: args.seed,
        ..BuildOptions::default()
    };
    let result = bundle::build_bundle_with(&profiles, &options)
        .and_then(|output| bundle::save_bundle(&output.bundle, &args.output).map(|()| output));
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: stage={}: {e}", stage(&e));
            return 1;
        }
    };
    let b = &output.bundle;
    let _ = writeln!(
        out,
        "seed={} researchers={} insufficient_data={} vocabulary={}",
        b.seed,
        b.researchers.len(),
        b.researchers.iter().filter(|r| r.insufficient_data).count(),
        b.vocabulary.len()
    );
    for (record, artifacts) in b.variants.iter().zip(&output.artifacts) {
        let fits: Vec<String> = record
            .clusterings
            .iter()
            .map(|c| {
                format!(
                    "{}:{}/{}",
                    c.k,
                    if c.converged { "ok" } else { "max" },
                    c.n_iterations
                )
            })
            .collect();
        let _ = writeln!(
            out,
            "{} researchers={} vocabulary={} explained=[{:.4}, {:.4}] fits={}",
            record.id,
            record.coords.len(),
            record.vocabulary_size,
            record.explained_variance[0],
            record.explained_variance[1],
            fits.join(" ")
        );
        if args.verbose {
            for model in &artifacts.clusterings {
                for line in model.trace_lines() {
                    let _ = writeln!(out, "  {} k={} {line}", record.id, model.k);
                }
            }
        }
    }
    let _ = writeln!(out, "wrote {}", args.output.display());
    0
}

pub fn cmd_query(args: &QueryArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let b = match bundle::load_bundle(&args.bundle) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(
                err,
                "error: cannot read bundle {}: {e}",
                args.bundle.display()
            );
            return 1;
        }
    };
    let index = match bundle::query_index(&b, &args.variant) {
        Ok(i) => i,
        Err(e) => {
            let known: Vec<&str> = b.variants.iter().map(|v| v.id.as_str()).collect();
            let _ = writeln!(err, "error: {e}; available: {}", known.join(", "));
            return 1;
        }
    };
    let result = score_query(&index, &args.text);
    let ids = b.researcher_ids();
    if !result.unmatched_terms.is_empty() {
        let _ = writeln!(
            out,
            "note: no match for stems: {}",
            result.unmatched_terms.join(", ")
        );
    }
    let k = usize::try_from(args.top).unwrap_or(usize::MAX);
    let rows = top_k(&result, &ids, k);
    let names: std::collections::HashMap<&str, &str> = b
        .researchers
        .iter()
        .map(|r| (r.id.as_str(), r.name.as_str()))
        .collect();
    let id_w = rows
        .iter()
        .map(|(id, _)| id.len())
        .max()
        .unwrap_or(2)
        .max(2);
    let name_w = rows
        .iter()
        .map(|(id, _)| names[id].chars().count())
        .max()
        .unwrap_or(4)
        .max(4);
    let _ = writeln!(
        out,
        "{:>4}  {:<id_w$}  {:<name_w$}  {:>6}",
        "rank", "id", "name", "score"
    );
    for (rank, (id, score)) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:<id_w$}  {:<name_w$}  {:>6.4}",
            rank + 1,
            id,
            names[id],
            score
        );
    }
    0
}

/// A running static file server.
pub struct StaticServer {
    pub port: u16,
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
}

impl StaticServer {
    /// Blocks until the server is stopped.
    pub fn join(self) {
        for w in self.workers {
            let _ = w.join();
        }
    }

    pub fn stop(self) {
        for _ in &self.workers {
            self.server.unblock();
        }
        self.join();
    }
}

/// Binds `port` (0 picks a free one) and serves `ui_dir` plus the bundle
/// at `/bundle.json` from `workers` threads.
pub fn start_server(
    bundle_path: &Path,
    ui_dir: &Path,
    port: u16,
    workers: usize,
) -> Result<StaticServer> {
    let bundle_bytes: Arc<Vec<u8>> = Arc::new(
        std::fs::read(bundle_path)
            .with_context(|| format!("cannot read bundle {}", bundle_path.display()))?,
    );
    if !ui_dir.is_dir() {
        anyhow::bail!("ui directory {} does not exist", ui_dir.display());
    }
    let server = Server::http(("127.0.0.1", port))
        .map_err(|e| anyhow::anyhow!("cannot listen on port {port}: {e}"))?;
    let port = server
        .server_addr()
        .to_ip()
        .map(|a| a.port())
        .unwrap_or(port);
    let server = Arc::new(server);
    let ui_dir = Arc::new(ui_dir.to_path_buf());
    let workers = (0..workers.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let bundle_bytes = Arc::clone(&bundle_bytes);
            let ui_dir = Arc::clone(&ui_dir);
            std::thread::spawn(move || {
                while let Ok(request) = server.recv() {
                    let response = respond(request.method(), request.url(), &bundle_bytes, &ui_dir);
                    let _ = request.respond(response);
                }
            })
        })
        .collect();
    Ok(StaticServer {
        port,
        server,
        workers,
    })
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        Some("txt") => "text/plain; charset=utf-8",
        _ => "application/octet-stream",
    }
}

fn with_type(bytes: Vec<u8>, ty: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", ty).expect("static header");
    // Plain Content-Length framing instead of chunked transfer.
    Response::from_data(bytes)
        .with_header(header)
        .with_chunked_threshold(usize::MAX)
}

fn respond(
    method: &Method,
    url: &str,
    bundle_bytes: &[u8],
    ui_dir: &Path,
) -> Response<std::io::Cursor<Vec<u8>>> {
    let not_found = || Response::from_string("not found").with_status_code(404);
    if !matches!(method, Method::Get | Method::Head) {
        return Response::from_string("method not allowed").with_status_code(405);
    }
    let path = url.split(['?', '#']).next().unwrap_or("/");
    if path == "/bundle.json" {
        return with_type(bundle_bytes.to_vec(), "application/json");
    }
    let rel = Path::new(path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return not_found();
    }
    let mut file = ui_dir.join(rel);
    if file.is_dir() {
        file.push("index.html");
    }
    match std::fs::read(&file) {
        Ok(bytes) => with_type(bytes, content_type(&file)),
        Err(_) => not_found(),
    }
}
