fn main() {
    std::process::exit(fakell::cli::main_with_args(std::env::args_os()));
}
