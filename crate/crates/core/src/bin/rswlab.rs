fn main() {
    std::process::exit(rswlab_core::cli::run(std::env::args()));
}
