use clap::Parser;

fn main() {
    let cli = zklogin_cli::Cli::parse();
    if let Err(e) = zklogin_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
