fn main() {
    std::process::exit(qcvxdiv::cli::main());
}
