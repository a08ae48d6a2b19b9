fn main() {
    std::process::exit(roomsim::cli::run(std::env::args_os()));
}
