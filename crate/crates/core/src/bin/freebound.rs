fn main() {
    std::process::exit(freebound::cli::run(std::env::args_os()));
}
