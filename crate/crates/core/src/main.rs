fn main() {
    std::process::exit(tsquad::cli::run());
}
