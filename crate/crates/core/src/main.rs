fn main() {
    std::process::exit(braceforge::cli::run());
}
