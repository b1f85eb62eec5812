use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use relplay_core::load_catalog;
use relplay_service::{router, Config, DEFAULT_MAX_BODY_BYTES, DEFAULT_PORT};

mod commands;

use commands::{Failure, Format};

/// Translate SQL into relational algebra, optimize it and inspect the data at
/// every step.
#[derive(Parser)]
#[command(name = "relplay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the relational algebra for a query.
    Show {
        sql: String,
        #[arg(long)]
        optimize: bool,
        #[arg(long, value_enum, default_value_t = Format::Unicode)]
        format: Format,
        /// Highlight operator labels in tree output.
        #[arg(long)]
        color: bool,
    },
    /// Evaluate a query and print the rows at one node (the root by default).
    Eval {
        sql: String,
        #[arg(long)]
        optimize: bool,
        /// Dotted child indices, e.g. `0.1`; empty for the root.
        #[arg(long)]
        node: Option<String>,
    },
    /// Print the unoptimized and optimized trees and the rewrite trace.
    Diff {
        sql: String,
        #[arg(long)]
        color: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "HOST", default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Directory of built UI assets to serve at `/`.
        #[arg(long, env = "STATIC_DIR")]
        static_dir: Option<PathBuf>,
        #[arg(long, env = "MAX_BODY_BYTES", default_value_t = DEFAULT_MAX_BODY_BYTES)]
        max_body_bytes: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let catalog = load_catalog();
    let result = match cli.command {
        Command::Show { sql, optimize, format, color } => commands::show(&catalog, &sql, optimize, format, color),
        Command::Eval { sql, optimize, node } => commands::eval(&catalog, &sql, optimize, node.as_deref()),
        Command::Diff { sql, color } => commands::diff(&catalog, &sql, color),
        Command::Serve { host, port, static_dir, max_body_bytes } => {
            let config = Config { max_body_bytes, static_dir, ..Config::default() };
            return serve(catalog, &host, port, &config);
        }
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}

#[tokio::main]
async fn serve(catalog: relplay_core::Catalog, host: &str, port: u16, config: &Config) -> ExitCode {
    let addr: SocketAddr = match format!("{host}:{port}").parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: bad listen address {host}:{port}: {e}");
            return ExitCode::from(commands::EXIT_USER_ERROR as u8);
        }
    };
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {addr}: {e}");
            return ExitCode::FAILURE;
        }
    };
    eprintln!("listening on http://{addr}");
    let app = router(Arc::new(catalog), config);
    match axum::serve(listener, app).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
