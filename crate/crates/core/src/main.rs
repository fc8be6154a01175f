fn main() {
    std::process::exit(sampling_recovery::cli::run(std::env::args_os()));
}
