fn main() {
    std::process::exit(hormander::cli::main_from_args(std::env::args_os()));
}
