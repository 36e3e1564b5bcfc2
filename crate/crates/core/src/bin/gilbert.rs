fn main() {
    std::process::exit(gilbert::cli::run(std::env::args_os()));
}
