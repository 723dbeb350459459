fn main() {
    std::process::exit(hardykit::cli::main_with_args(std::env::args()));
}
