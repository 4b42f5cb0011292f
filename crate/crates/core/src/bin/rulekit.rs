fn main() {
    std::process::exit(rulekit::experiment::cli_main(std::env::args_os()));
}
