fn main() {
    std::process::exit(blochop::run());
}
