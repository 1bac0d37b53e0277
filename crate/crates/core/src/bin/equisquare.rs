fn main() {
    std::process::exit(equisquare::cli::run(std::env::args_os()));
}
