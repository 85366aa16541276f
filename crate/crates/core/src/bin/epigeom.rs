fn main() {
    std::process::exit(epigeom::cli::run(std::env::args_os()));
}
