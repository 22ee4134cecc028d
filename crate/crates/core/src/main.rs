use clap::Parser;

fn main() {
    let cli = icbound::cli::Cli::parse();
    match icbound::cli::run(&cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
