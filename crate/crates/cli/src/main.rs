fn main() {
    let code = xxz_im_cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
