fn main() {
    std::process::exit(mcdepcnn::cli::run(std::env::args_os()));
}
