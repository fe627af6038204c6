fn main() {
    std::process::exit(gradsurf::cli::main_with_args(std::env::args_os()));
}
