fn main() {
    std::process::exit(hamverify::cli::run(std::env::args_os()));
}
