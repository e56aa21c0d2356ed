fn main() {
    env_logger::init();
    std::process::exit(feasregion::cli::run(std::env::args_os()));
}
