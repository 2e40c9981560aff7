fn main() {
    std::process::exit(lathom_cli::main_with(std::env::args_os()));
}
