fn main() {
    std::process::exit(bergman_cli::main_with_args(std::env::args_os()));
}
