fn main() {
    std::process::exit(smoothmin::cli::run_from_env());
}
