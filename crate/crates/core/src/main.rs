fn main() {
    std::process::exit(fetree::cli::main_with_args(std::env::args_os()));
}
