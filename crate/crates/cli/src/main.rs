use clap::Parser;

fn main() {
    let cli = design_forge_cli::Cli::parse();
    match design_forge_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
