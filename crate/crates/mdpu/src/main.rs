fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MDPU_LOG"))
        .target(env_logger::Target::Stderr)
        .init();
    std::process::exit(mdpu::cli::main_entry(std::env::args_os()));
}
