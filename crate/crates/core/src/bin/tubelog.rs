fn main() {
    std::process::exit(tubelog::cli::run(std::env::args_os()));
}
