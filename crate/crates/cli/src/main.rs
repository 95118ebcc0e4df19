use clap::Parser;
use stlab_cli::run::{threads_from_env, with_thread_limit};
use stlab_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = with_thread_limit(threads_from_env(), || execute(&cli.command)) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
