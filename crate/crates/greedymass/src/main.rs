fn main() {
    std::process::exit(greedymass::cli::execute());
}
