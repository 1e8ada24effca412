fn main() {
    std::process::exit(rkfd::cli::run(std::env::args_os()));
}
