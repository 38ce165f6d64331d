fn main() {
    std::process::exit(rig_core::cli::run(std::env::args_os()));
}
