fn main() {
    std::process::exit(olecar::cli::main_with_args(std::env::args_os()));
}
