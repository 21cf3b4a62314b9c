use clap::Parser;

fn main() {
    let cli = argmine_cli::args::Cli::parse();
    if let Err(e) = argmine_cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
