fn main() {
    std::process::exit(bellsim_cli::execute(std::env::args_os()));
}
