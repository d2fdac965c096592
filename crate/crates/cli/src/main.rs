use clap::Parser;

fn main() {
    let cli = match perclab::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { perclab::error::EXIT_SCHEMA } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match perclab::run(&cli) {
        Ok(dir) => eprintln!("wrote {}", dir.display()),
        Err(e) => {
            eprintln!("perclab: {e}");
            std::process::exit(e.code);
        }
    }
}
