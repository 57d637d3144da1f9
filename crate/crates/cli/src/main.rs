fn main() {
    std::process::exit(gdirac_cli::run(std::env::args_os()));
}
