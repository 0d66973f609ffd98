use clap::Parser;

fn main() {
    let cli = q2ma::Cli::parse();
    match q2ma::run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("q2ma: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
