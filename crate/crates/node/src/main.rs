fn main() {
    std::process::exit(ssd_node::cli::main());
}
