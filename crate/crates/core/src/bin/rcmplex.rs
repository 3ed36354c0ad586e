fn main() -> std::process::ExitCode {
    rcmplex::cli::main()
}
