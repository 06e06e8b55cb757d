fn main() {
    std::process::exit(mcboost::cli::main_with_args(std::env::args_os()));
}
