fn main() {
    std::process::exit(regint::cli::main_with_args(std::env::args_os()));
}
