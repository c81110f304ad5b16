use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match ds_triplet::cli::run(std::env::args_os()) {
        Ok(out) => {
            print!("{out}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) if e.code == 0 => {
            print!("{}", e.message);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprint!("{}", e.message);
            if !e.message.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(e.code as u8)
        }
    }
}
