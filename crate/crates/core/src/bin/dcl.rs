fn main() {
    std::process::exit(dyson_lab::cli::main_from(std::env::args_os()));
}
