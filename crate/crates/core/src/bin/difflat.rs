fn main() {
    std::process::exit(difflat::cli::main());
}
