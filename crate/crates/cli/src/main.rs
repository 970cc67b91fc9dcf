use std::process::ExitCode;

use cmc_orbit_cli::{run_from, Outcome};

fn main() -> ExitCode {
    let outcome = run_from(std::env::args_os());
    match &outcome {
        Outcome::Ok => {}
        Outcome::Info(text) => print!("{text}"),
        Outcome::Err(e) => eprintln!("{}", e.to_json()),
    }
    ExitCode::from(outcome.exit_code())
}
