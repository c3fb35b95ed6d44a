fn main() {
    std::process::exit(truthful_cascade::harness::run_cli(std::env::args_os()));
}
