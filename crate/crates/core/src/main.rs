fn main() {
    std::process::exit(wgfem::cli::run(std::env::args_os()));
}
