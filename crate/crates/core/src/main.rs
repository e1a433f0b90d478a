fn main() {
    std::process::exit(pencilab::cli::run(std::env::args_os()));
}
