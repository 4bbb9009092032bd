fn main() {
    std::process::exit(oumle::cli::run(std::env::args_os()));
}
