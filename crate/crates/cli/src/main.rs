use clap::Parser;
use fewbody_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(a) => {
            println!("{}", a.csv.display());
            println!("{}", a.manifest.display());
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            std::process::exit(e.exit_code());
        }
    }
}
