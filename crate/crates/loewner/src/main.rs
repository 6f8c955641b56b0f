fn main() {
    std::process::exit(loewner::cli::run(std::env::args_os()));
}
