fn main() {
    std::process::exit(semicap::cli::run());
}
