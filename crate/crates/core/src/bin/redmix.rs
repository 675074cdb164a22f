fn main() {
    std::process::exit(redmix::cli::main_with_args(std::env::args_os()));
}
