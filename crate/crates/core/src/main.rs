fn main() {
    std::process::exit(linfty::run_cli());
}
