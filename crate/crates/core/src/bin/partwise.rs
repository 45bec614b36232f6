use clap::Parser;

fn main() {
    let cli = partwise::cli::Cli::parse();
    std::process::exit(partwise::cli::run(&cli));
}
