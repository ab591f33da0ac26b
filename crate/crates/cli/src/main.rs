fn main() {
    std::process::exit(vsaplace_cli::run(std::env::args_os()));
}
