fn main() {
    std::process::exit(rydberg_toffoli::cli::main_with_args(
        std::env::args_os().collect(),
    ));
}
