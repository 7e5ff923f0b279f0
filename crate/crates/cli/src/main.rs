fn main() {
    std::process::exit(azulift::run(std::env::args_os()));
}
