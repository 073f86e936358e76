fn main() {
    std::process::exit(clef::cli::run(std::env::args_os()));
}
