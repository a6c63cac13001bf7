fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(theta_bundle_cli::app::run(args));
}
