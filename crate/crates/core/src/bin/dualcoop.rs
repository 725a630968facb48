fn main() {
    std::process::exit(dualcoop::cli::run(std::env::args_os()));
}
