fn main() {
    std::process::exit(polymix::harness::run_cli(std::env::args_os()));
}
