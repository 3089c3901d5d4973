fn main() {
    std::process::exit(cgdp_cli::main_with_args(std::env::args_os()));
}
