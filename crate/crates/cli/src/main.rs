fn main() {
    std::process::exit(hyperhaar_cli::run(std::env::args_os()));
}
