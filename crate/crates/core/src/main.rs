fn main() {
    std::process::exit(levelflow::cli::main_with_args(std::env::args_os()));
}
