fn main() {
    std::process::exit(bayes_arith::cli::main_with_args(std::env::args_os()));
}
