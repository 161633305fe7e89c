fn main() {
    std::process::exit(rado_core::cli::run());
}
