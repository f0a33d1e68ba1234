fn main() {
    std::process::exit(rclocality::cli::main_with_args(std::env::args_os()));
}
