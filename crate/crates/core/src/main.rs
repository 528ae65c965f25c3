fn main() {
    std::process::exit(fading_flock::cli::run(std::env::args_os()));
}
