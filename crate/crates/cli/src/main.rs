fn main() {
    std::process::exit(pvaudit::run(std::env::args_os()));
}
