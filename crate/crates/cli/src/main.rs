use std::process::ExitCode;

use clap::Parser;

use beamhom_cli::{resolve, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = resolve(&cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            println!("{}", o.summary);
            for a in &o.artifacts {
                println!("wrote {}", a.display());
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
