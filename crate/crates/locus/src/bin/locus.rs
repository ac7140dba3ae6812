fn main() {
    std::process::exit(locus::cli::run(std::env::args_os()));
}
