fn main() {
    std::process::exit(ulamfloat::cli::cli_main(std::env::args()));
}
