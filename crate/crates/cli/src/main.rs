use std::fs;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rave_core::analytics::AnalyticsReport;
use rave_core::api::report_document;
use rave_core::annotate::{annotate_with_report, Gazetteer};
use rave_core::bundle::relocate_images;
use rave_core::ingest::{parse_config, parse_results_bytes};
use rave_core::model::build_collection;
use rave_core::pipeline::{
    bundle_from_images, default_facets, image_refs_in, read_records, read_serps, write_file,
    write_records,
};
use rave_core::pivot::emit_cxml;
use rave_core::render::render_dataset;
use rave_core::FacetDefinition;
use rave_server::{ServerConfig, DEFAULT_PORT};
use tracing_subscriber::EnvFilter;

const DEFAULT_TITLE: &str = "Relevance assessments";

#[derive(Parser)]
#[command(name = "rave", version, about = "Relevance-assessment pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a delimited results file into canonical records JSON.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute query length, type and entity annotations.
    Annotate {
        #[arg(long)]
        gazetteer: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unit, worker and ranker summaries as one JSON document.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Render each record's result page and thumbnail as SVG.
    Render {
        #[arg(long)]
        serps: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile a collection.
    #[command(subcommand)]
    Emit(Emit),
    /// Serve a bundle over HTTP.
    Serve {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, env = "RAVE_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        addr: IpAddr,
        /// Static files for the browser client.
        #[arg(long)]
        ui: Option<PathBuf>,
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

#[derive(Args)]
struct CollectionArgs {
    /// Column config whose facet list is used; the built-in facets otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_TITLE)]
    title: String,
}

#[derive(Subcommand)]
enum Emit {
    /// Pivot CXML from a directory holding records.json and images/.
    Pivot {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: CollectionArgs,
    },
    /// Self-contained Exhibit bundle.
    Bundle {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: CollectionArgs,
    },
}

fn facets(opts: &CollectionArgs) -> Result<Vec<FacetDefinition>> {
    match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
            let mapping = parse_config(&text).with_context(|| path.display().to_string())?;
            Ok(mapping.facet_definitions())
        }
        None => Ok(default_facets()),
    }
}

fn ingest(config: &Path, input: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| config.display().to_string())?;
    let mapping = parse_config(&text).with_context(|| config.display().to_string())?;
    let bytes = fs::read(input).with_context(|| input.display().to_string())?;
    let (records, report) =
        parse_results_bytes(&bytes, &mapping).with_context(|| input.display().to_string())?;
    write_records(out, &records)?;
    for r in &report.rejected {
        eprintln!("line {}: {}", r.row, r.reason);
    }
    for d in &report.duplicate_assignments {
        eprintln!("duplicate assignment: worker {} on {:?}", d.worker_id, d.query);
    }
    eprintln!(
        "{} rows: {} accepted, {} rejected",
        report.total_rows(),
        report.accepted,
        report.rejected.len()
    );
    Ok(())
}

fn annotate(gazetteer: &Path, input: &Path, out: &Path) -> Result<()> {
    let gaz = Gazetteer::load_dir(gazetteer).with_context(|| gazetteer.display().to_string())?;
    let records = read_records(input)?;
    let (annotated, mismatches) = annotate_with_report(&records, &gaz);
    write_records(out, &annotated)?;
    eprintln!(
        "{} records annotated, {} stored values replaced",
        annotated.len(),
        mismatches.len()
    );
    Ok(())
}

fn analyze(input: &Path, report: &Path) -> Result<()> {
    let records = read_records(input)?;
    let doc = AnalyticsReport::compute(&records);
    write_file(report, &report_document(&doc))?;
    eprintln!(
        "{} units, {} workers analysed",
        doc.units.len(),
        doc.workers.len()
    );
    Ok(())
}

fn render(serps: &Path, out: &Path) -> Result<()> {
    let serps = read_serps(serps)?;
    let written = render_dataset(&serps, out)?;
    eprintln!("{} pages rendered into {}", written.len(), out.display());
    Ok(())
}

fn emit_pivot(dir: &Path, out: &Path, opts: &CollectionArgs) -> Result<()> {
    let records = read_records(&dir.join("records.json"))?;
    let images = dir.join("images");
    let refs = image_refs_in(&images, &records);
    let collection = build_collection(&opts.title, &records, &facets(opts)?, &refs)?;
    let cxml = emit_cxml(&relocate_images(&collection)?)?;
    write_file(out, &cxml)?;
    eprintln!("{} items written to {}", collection.items().len(), out.display());
    Ok(())
}

fn emit_bundle(records: &Path, images: &Path, out: &Path, opts: &CollectionArgs) -> Result<()> {
    if !images.is_dir() {
        bail!("{}: not a directory", images.display());
    }
    let records = read_records(records)?;
    let (_, manifest) = bundle_from_images(&opts.title, &records, &facets(opts)?, images, out)?;
    eprintln!(
        "bundle with {} items and {} files written to {}",
        manifest.items,
        manifest.files.len() + 1,
        out.display()
    );
    Ok(())
}

fn serve(config: ServerConfig) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(rave_server::run(config))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { config, input, out } => ingest(&config, &input, &out),
        Command::Annotate {
            gazetteer,
            input,
            out,
        } => annotate(&gazetteer, &input, &out),
        Command::Analyze { input, report } => analyze(&input, &report),
        Command::Render { serps, out } => render(&serps, &out),
        Command::Emit(Emit::Pivot {
            collection,
            out,
            opts,
        }) => emit_pivot(&collection, &out, &opts),
        Command::Emit(Emit::Bundle {
            records,
            images,
            out,
            opts,
        }) => emit_bundle(&records, &images, &out, &opts),
        Command::Serve {
            bundle,
            port,
            addr,
            ui,
            cors_origin,
        } => serve(ServerConfig {
            addr,
            port,
            bundle_dir: bundle,
            ui_dir: ui,
            cors_origin,
        }),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            EnvFilter::try_from_env("RAVE_LOG").unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
