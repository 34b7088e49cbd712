fn main() {
    std::process::exit(thirring_lab::cli::run(std::env::args_os()));
}
