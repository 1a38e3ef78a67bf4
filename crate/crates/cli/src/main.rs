fn main() {
    let code = idplim_cli::run(std::env::args_os());
    std::process::exit(code);
}
