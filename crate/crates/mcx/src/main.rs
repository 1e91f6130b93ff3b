fn main() {
    std::process::exit(mcx::cli::run(std::env::args_os()));
}
