fn main() {
    std::process::exit(uavdeploy_cli::run(std::env::args_os()));
}
