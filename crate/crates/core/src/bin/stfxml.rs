fn main() {
    std::process::exit(stfxml::cli::main_with_std());
}
