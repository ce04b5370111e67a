fn main() {
    std::process::exit(descforge_cli::main_with_args(std::env::args_os()));
}
