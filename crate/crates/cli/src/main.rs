fn main() {
    std::process::exit(per1::main_with_args(std::env::args_os()));
}
