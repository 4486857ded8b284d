fn main() {
    std::process::exit(lvfb::cli::main_with(std::env::args_os(), std::env::vars()));
}
