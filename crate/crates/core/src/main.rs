fn main() {
    std::process::exit(nsp_wavelab::cli::main_with_args(std::env::args_os()));
}
