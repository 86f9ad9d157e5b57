fn main() {
    std::process::exit(harnack_lab::cli::run_cli(std::env::args_os()));
}
