fn main() -> std::process::ExitCode {
    qmdisc::cli::main_with_args(std::env::args_os())
}
