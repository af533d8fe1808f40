fn main() {
    std::process::exit(thermal_cp::cli::main_with(std::env::args_os()));
}
