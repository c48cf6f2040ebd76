fn main() {
    std::process::exit(perfolayer_cli::run(std::env::args_os()));
}
