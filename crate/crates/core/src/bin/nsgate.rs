fn main() {
    std::process::exit(nsgate::cli::run(std::env::args_os()));
}
