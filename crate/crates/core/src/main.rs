fn main() {
    std::process::exit(c3ma::cli::run(std::env::args_os()));
}
