fn main() {
    std::process::exit(chwave_cli::run(std::env::args_os()));
}
