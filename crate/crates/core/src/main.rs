fn main() {
    std::process::exit(polarflip::cli::run_cli(std::env::args_os()));
}
