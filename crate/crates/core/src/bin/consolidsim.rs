fn main() {
    std::process::exit(consolidsim::cli::main_with_args(std::env::args_os()));
}
