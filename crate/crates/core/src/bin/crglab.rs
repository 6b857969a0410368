fn main() {
    std::process::exit(crglab::cli::main_with(std::env::args_os()));
}
