fn main() {
    std::process::exit(mriq::run(std::env::args_os()));
}
