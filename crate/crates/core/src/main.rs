fn main() {
    std::process::exit(repulse::cli::main_with_args(std::env::args_os()));
}
