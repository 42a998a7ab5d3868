fn main() {
    std::process::exit(npwigner::cli::run(std::env::args_os()));
}
