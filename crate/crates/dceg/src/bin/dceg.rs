fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(dceg::interface::cli::run(&argv));
}
