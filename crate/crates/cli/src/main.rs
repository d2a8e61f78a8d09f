fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(stackfold_cli::run(&argv));
}
