//! Writes a synthetic master + three season files for trying the pipeline.
//!
//! Usage: cargo run --release --example gen_fixture -- <dir> [--small] [--seed N]

use dreamteam::synthetic::{self, FixtureSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| {
        eprintln!("usage: gen_fixture <dir> [--small] [--seed N]");
        std::process::exit(1);
    });
    let mut spec = FixtureSpec::default();
    let mut small = false;
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--small" => small = true,
            "--seed" => {
                spec.seed = args
                    .next()
                    .and_then(|v| v.parse().ok())
                    .unwrap_or_else(|| {
                        eprintln!("--seed needs an integer");
                        std::process::exit(1);
                    })
            }
            other => {
                eprintln!("unknown flag '{other}'");
                std::process::exit(1);
            }
        }
    }
    if small {
        spec = FixtureSpec { seed: spec.seed, ..FixtureSpec::small(spec.seed) };
    }
    let paths = synthetic::write_to_dir(std::path::Path::new(&dir), &spec).unwrap();
    println!("wrote {}", paths.master.display());
    for p in &paths.seasons {
        println!("wrote {}", p.display());
    }
}
