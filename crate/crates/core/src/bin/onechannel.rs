fn main() {
    std::process::exit(onechannel::cli::run(std::env::args_os()));
}
