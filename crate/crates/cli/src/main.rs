use std::io::{self, Write};
use std::process::ExitCode;

use evidential_cli::{parse_args, run};

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args_os()) {
        Ok(Ok(cli)) => cli,
        Ok(Err(help)) => {
            print!("{help}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let result = run(&cli, &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
