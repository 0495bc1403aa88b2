fn main() {
    std::process::exit(frmv::cli::run(std::env::args_os()));
}
