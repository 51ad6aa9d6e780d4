fn main() {
    std::process::exit(ttnn_recon::cli::main_with_args(std::env::args_os()));
}
