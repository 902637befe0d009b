use clap::Parser;

fn main() {
    let cli = aeos_cli::Cli::parse();
    if let Err(e) = aeos_cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
