fn main() {
    std::process::exit(bell_asym::run_cli(std::env::args_os()));
}
