fn main() {
    std::process::exit(meshbias::cli::main_with_args(std::env::args_os()));
}
