fn main() {
    std::process::exit(demfuse::cli::run(std::env::args_os()));
}
