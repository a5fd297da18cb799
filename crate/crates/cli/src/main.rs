fn main() {
    let code = cramer_cli::run(std::env::args_os());
    std::process::exit(code);
}
