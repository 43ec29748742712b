fn main() {
    std::process::exit(ppfs::cli::run(std::env::args_os()));
}
