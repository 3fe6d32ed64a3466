use clap::Parser;

fn main() {
    let cli = ppmedian::cli::Cli::parse();
    if let Err(e) = ppmedian::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
