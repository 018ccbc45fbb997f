fn main() {
    std::process::exit(capnet::cli::main_with_args(std::env::args_os()));
}
