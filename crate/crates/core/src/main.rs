use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("LRTC_LOG", "info")).init();
    lrtc::cli::main(lrtc::cli::Args::parse())
}
