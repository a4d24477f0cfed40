use clap::Parser;

fn main() {
    let cli = zscore::cli::Cli::parse();
    std::process::exit(zscore::cli::run(cli));
}
