use clap::Parser;

fn main() {
    let cli = pcmlax_cli::Cli::parse();
    std::process::exit(pcmlax_cli::run(cli));
}
