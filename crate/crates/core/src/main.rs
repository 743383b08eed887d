fn main() {
    std::process::exit(ttdesign::cli::run(std::env::args_os()));
}
