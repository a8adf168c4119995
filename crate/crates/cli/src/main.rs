fn main() {
    std::process::exit(luroth_dim_cli::run(std::env::args_os()));
}
