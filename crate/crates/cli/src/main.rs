fn main() {
    std::process::exit(steckin_cli::run(std::env::args_os()));
}
