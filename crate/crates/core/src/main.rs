fn main() {
    std::process::exit(symmetry_core::cli::run(std::env::args_os()));
}
