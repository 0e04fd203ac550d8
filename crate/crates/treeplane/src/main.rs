fn main() {
    std::process::exit(treeplane::cli::run(std::env::args_os()));
}
