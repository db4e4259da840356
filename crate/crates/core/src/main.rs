fn main() {
    std::process::exit(cosserat_core::cli::main());
}
