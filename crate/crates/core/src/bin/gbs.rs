fn main() {
    std::process::exit(gbs::cli::run(std::env::args_os().skip(1)));
}
