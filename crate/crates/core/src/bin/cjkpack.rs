use clap::Parser;

fn main() {
    let cli = cjkpack::cli::Cli::parse();
    if let Err(e) = cjkpack::cli::run(cli) {
        eprintln!("cjkpack: {e}");
        std::process::exit(e.exit_code());
    }
}
