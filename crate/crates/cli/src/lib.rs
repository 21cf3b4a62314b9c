//! Command-line and HTTP front ends for the `argmine` engine.

pub mod args;
pub mod commands;
pub mod engine;
pub mod service;

use anyhow::Context;

use crate::args::{Cli, Command, ServeArgs};
use crate::engine::{load_documents, load_ground_truths, Engine};
use crate::service::{router, AppState};

pub fn state_from_args(args: &ServeArgs) -> anyhow::Result<AppState> {
    Ok(AppState {
        engine: Engine::from_tuning(&args.tuning)?,
        docs: load_documents(&args.docs)?,
        patterns_dir: args.patterns.clone(),
        gt: args.gt.as_ref().map(|g| load_ground_truths(std::slice::from_ref(g))).transpose()?,
        results_dir: args.results.clone(),
    })
}

pub async fn serve(args: &ServeArgs) -> anyhow::Result<()> {
    let state = state_from_args(args)?;
    let n = state.docs.len();
    let addr = format!("{}:{}", args.host, args.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    println!("serving {n} documents on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Extract(a) => commands::extract(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Gen(a) => commands::gen(&a),
        Command::Serve(a) => tokio::runtime::Runtime::new()?.block_on(serve(&a)),
    }
}
