fn main() {
    std::process::exit(wqed::cli::main_with_args(std::env::args_os().collect()));
}
