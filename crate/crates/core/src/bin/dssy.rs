fn main() {
    std::process::exit(dssy::bench::cli::run(std::env::args_os()));
}
