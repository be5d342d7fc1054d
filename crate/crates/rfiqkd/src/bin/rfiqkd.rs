use clap::Parser;

fn main() {
    let cli = rfiqkd::cli::Cli::parse();
    if let Err(e) = rfiqkd::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code);
    }
}
