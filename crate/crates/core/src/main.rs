fn main() -> std::process::ExitCode {
    cdols::cli::main()
}
