fn main() {
    std::process::exit(diffnet::cli::run());
}
