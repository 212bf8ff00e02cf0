use clap::Parser;

fn main() {
    let cli = maxstable_cli::Cli::parse();
    let result = maxstable_cli::run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    std::process::exit(maxstable_cli::exit_code(&result));
}
