fn main() {
    std::process::exit(geoprob::cli::run(std::env::args_os()));
}
