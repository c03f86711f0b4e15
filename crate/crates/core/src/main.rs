fn main() {
    std::process::exit(votebalance::cli::run(std::env::args_os()));
}
