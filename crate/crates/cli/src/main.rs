use std::process::ExitCode;

fn main() -> ExitCode {
    cpl_cli::main_entry()
}
