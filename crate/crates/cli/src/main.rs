fn main() {
    std::process::exit(ultrametric_cli::run(std::env::args_os()));
}
