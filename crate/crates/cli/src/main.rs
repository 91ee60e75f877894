fn main() {
    std::process::exit(hfcast_cli::main_with_args(std::env::args_os()));
}
