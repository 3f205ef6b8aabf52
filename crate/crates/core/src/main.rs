fn main() {
    std::process::exit(vprunc::cli::run(std::env::args_os()));
}
