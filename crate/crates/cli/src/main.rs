use clap::Parser;
use jetcalc_cli::{render, run, Cli};

fn main() {
    let cli = Cli::parse();
    let (out, status) = run(&cli);
    println!("{}", render(&out, &cli.global));
    std::process::exit(status as i32);
}
