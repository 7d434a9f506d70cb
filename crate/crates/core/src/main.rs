fn main() {
    std::process::exit(malleable_sched::cli::run_command(std::env::args_os()));
}
