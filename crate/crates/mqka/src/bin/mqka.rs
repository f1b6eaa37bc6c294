fn main() {
    std::process::exit(mqka::cli::execute(std::env::args_os()));
}
