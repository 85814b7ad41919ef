fn main() {
    std::process::exit(msabm::cli_main(std::env::args_os()));
}
