use std::process::ExitCode;

fn main() -> ExitCode {
    zilm::cli::main()
}
