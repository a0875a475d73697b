fn main() {
    std::process::exit(circuitforge::cli::run(std::env::args_os()));
}
