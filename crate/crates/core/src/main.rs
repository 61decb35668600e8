fn main() {
    std::process::exit(escrate::cli::main_with_args(std::env::args_os()));
}
