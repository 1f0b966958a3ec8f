fn main() {
    std::process::exit(igs_lab::run(std::env::args_os()));
}
