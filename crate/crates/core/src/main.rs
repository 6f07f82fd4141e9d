use clap::Parser;

use cascade_lab::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
