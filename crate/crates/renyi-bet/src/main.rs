fn main() {
    std::process::exit(renyi_bet::cli::run(std::env::args_os()));
}
