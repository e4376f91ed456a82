fn main() {
    std::process::exit(summing_cli::run(std::env::args_os()));
}
