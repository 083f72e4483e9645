fn main() -> std::process::ExitCode {
    onsetqlab_cli::run(std::env::args_os())
}
