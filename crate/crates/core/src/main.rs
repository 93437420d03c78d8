fn main() {
    std::process::exit(socnet_sim::harness::cli::run(std::env::args_os()));
}
