fn main() {
    std::process::exit(ded_core::cli::cli_main(std::env::args_os()));
}
