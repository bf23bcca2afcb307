fn main() {
    std::process::exit(topkit::cli::run(std::env::args_os()));
}
