fn main() {
    std::process::exit(vekua::cli::run(std::env::args_os()));
}
