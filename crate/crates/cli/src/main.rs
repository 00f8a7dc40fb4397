use std::process::ExitCode;

use clap::Parser;
use shapley_r2_cli::alloc::CountingAlloc;
use shapley_r2_cli::{run, Cli};

#[global_allocator]
static GLOBAL: CountingAlloc = CountingAlloc;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shapley-r2: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
