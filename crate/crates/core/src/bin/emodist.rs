fn main() {
    std::process::exit(emodist::cli::cli_main(std::env::args_os()));
}
