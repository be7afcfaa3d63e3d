fn main() {
    std::process::exit(qdiff_cli::run(std::env::args_os()));
}
