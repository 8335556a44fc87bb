fn main() {
    std::process::exit(spanparse::cli::main_with_args(std::env::args_os()));
}
