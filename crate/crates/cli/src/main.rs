use clap::Parser;

fn main() {
    let cli = hgreen::args::Cli::parse();
    std::process::exit(hgreen::run(&cli));
}
