use clap::Parser;

use sdhall::cli::{run, RunConfig};

fn main() {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(&cfg));
}
