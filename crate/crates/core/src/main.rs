fn main() {
    std::process::exit(scatter_trace::cli::main_with_args(std::env::args_os()));
}
