fn main() {
    std::process::exit(autler_townes::cli::run(std::env::args_os()));
}
