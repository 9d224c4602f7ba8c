fn main() {
    std::process::exit(stablab::cli::main_with_args(std::env::args_os()));
}
