fn main() {
    std::process::exit(dualnls::cli::main_entry(std::env::args_os()));
}
