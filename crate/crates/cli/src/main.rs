fn main() {
    let code = radio_ae_cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
