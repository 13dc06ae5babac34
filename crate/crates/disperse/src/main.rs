use std::process::ExitCode;

fn main() -> ExitCode {
    disperse::cli::main_entry()
}
