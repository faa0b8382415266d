fn main() {
    std::process::exit(decoupled_renewal::cli::main_with_args(std::env::args_os()));
}
