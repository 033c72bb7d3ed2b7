fn main() {
    std::process::exit(spinmon_cli::main_with_args(std::env::args_os()));
}
