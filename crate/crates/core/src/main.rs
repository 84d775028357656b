fn main() {
    std::process::exit(bbsp::cli::main());
}
