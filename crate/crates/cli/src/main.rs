fn main() {
    std::process::exit(magboost_cli::run_main());
}
