use branchmix_cli::args::Cli;
use clap::Parser;

fn main() {
    // clap exits with 2 on a bad command line, 0 for --help
    let cli = Cli::parse();
    std::process::exit(branchmix_cli::main_with(&cli));
}
