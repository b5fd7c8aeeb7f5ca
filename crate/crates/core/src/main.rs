fn main() {
    std::process::exit(namewise::cli::run(std::env::args_os()));
}
