use clap::Parser;

use mzk::cli::{argv_from_config, run, Cli};

fn main() {
    let mut argv: Vec<String> = std::env::args().collect();
    // `mzk --config file.json` expands the file into the full argv.
    if argv.len() == 3 && argv[1] == "--config" {
        match argv_from_config(&argv[2]) {
            Ok(expanded) => {
                argv = std::iter::once(argv[0].clone()).chain(expanded).collect();
            }
            Err(e) => {
                eprintln!("error: {}", e.message);
                std::process::exit(e.exit_code);
            }
        }
    }
    let cli = Cli::parse_from(argv);
    let code = run(cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
