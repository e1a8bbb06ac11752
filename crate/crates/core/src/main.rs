fn main() {
    let code = ripening::cli::main_with_args(std::env::args().collect(), &mut std::io::stderr());
    std::process::exit(code);
}
