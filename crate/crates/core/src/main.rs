fn main() {
    std::process::exit(tangle_forge::cli::main_with_args(std::env::args_os()));
}
