fn main() {
    std::process::exit(slipflow_cli::run(std::env::args_os()));
}
