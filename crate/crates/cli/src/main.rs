fn main() {
    std::process::exit(knzeta_cli::run(std::env::args_os()));
}
