fn main() {
    std::process::exit(mdmtj::cli::run(std::env::args_os()));
}
