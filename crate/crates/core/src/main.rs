fn main() {
    std::process::exit(eyedp::cli::main());
}
