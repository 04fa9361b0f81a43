fn main() {
    std::process::exit(vegnn_cli::main_with_args(std::env::args_os()));
}
