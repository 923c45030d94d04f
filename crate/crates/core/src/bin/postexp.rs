fn main() {
    std::process::exit(postexp::cli::main());
}
