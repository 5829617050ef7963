use clap::Parser;
use stratcls::cli::{run, Cli, CliError};
use stratcls::Error;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        if let CliError::Model(Error::Infeasible {
            threshold_delta: Some(t),
        }) = &e
        {
            eprintln!("threshold_delta: {}", stratcls::format::float(*t));
        }
        std::process::exit(e.exit_code());
    }
}
