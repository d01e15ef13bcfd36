fn main() -> std::process::ExitCode {
    magnetoatom::cli::main_with_args(std::env::args_os())
}
