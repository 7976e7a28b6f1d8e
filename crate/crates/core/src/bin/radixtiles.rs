use clap::Parser;
use radixtiles::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
