fn main() {
    std::process::exit(branch_bayes_cli::run(std::env::args_os()));
}
