fn main() {
    std::process::exit(cbf_cli::run_cli(std::env::args_os()));
}
