fn main() {
    std::process::exit(formc::cli::run(std::env::args_os()));
}
