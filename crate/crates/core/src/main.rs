fn main() {
    std::process::exit(verifylab::cli::run());
}
