fn main() {
    std::process::exit(hym_cli::dispatch(std::env::args_os()));
}
