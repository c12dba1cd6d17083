fn main() {
    std::process::exit(pgeval::cli::main_with_args(std::env::args_os()));
}
