fn main() {
    std::process::exit(mpre::cli::main_with_args(std::env::args_os()));
}
