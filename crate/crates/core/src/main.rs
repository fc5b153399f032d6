fn main() {
    std::process::exit(curvsym::cli::main_with_args(std::env::args_os()));
}
