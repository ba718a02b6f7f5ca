fn main() {
    std::process::exit(qmimo::cli::run(std::env::args_os()));
}
