fn main() {
    std::process::exit(supertransfer::cli::run(std::env::args_os()));
}
